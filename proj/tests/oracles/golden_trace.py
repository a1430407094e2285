# Straight-line transcription of the per-wave update rule for a 4-sample,
# 1-wave, 1-pass frame. Prints the parameter triple after every sample; the
# values are frozen into test_sinefit.cpp and the acceptance suite.
import math

TWO_PI = 2.0 * math.pi
t = [(i - 1.5) / math.sqrt(15.0 / 12.0) for i in range(4)]
y = [0.3, -0.2, 0.5, 0.1]


def run(mode, step=1.0):
    a, f, p = 1.0, 1.0, 0.0
    h = 0.0
    out = []
    for x, yy in zip(t, y):
        if mode == "independent":
            s = math.sin(TWO_PI * x)
            ga = step * (h + a * s - yy) * s
            gf = step * (h + math.sin(TWO_PI * f * x) - yy) * (TWO_PI * x * math.cos(TWO_PI * f * x))
            gp = step * (h + math.sin(TWO_PI * x + TWO_PI * p) - yy) * (TWO_PI * math.cos(TWO_PI * x + TWO_PI * p))
        else:
            sf = math.sin(TWO_PI * f * x)
            ga = step * (h + a * sf - yy) * sf
            gf = step * (h + sf - yy) * (TWO_PI * x * math.cos(TWO_PI * f * x))
            arg = TWO_PI * f * x + TWO_PI * p
            gp = step * (h + a * math.sin(arg) - yy) * (TWO_PI * a * math.cos(arg))
        a, f, p = a - ga, f - gf, p - gp
        out.append((a, f, p))
    return out


print("times", [repr(v) for v in t])
for mode in ("independent", "dependent"):
    print(mode)
    for a, f, p in run(mode):
        print("  {%r, %r, %r}," % (a, f, p))
