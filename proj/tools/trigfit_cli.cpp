#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "trigfit/json_io.hpp"
#include "trigfit/trigfit.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace trigfit;

namespace {

constexpr const char* kVersion = "0.1.0";

enum ExitCode { kOk = 0, kArgError = 2, kNumericError = 3, kIoError = 4 };

/// Reads --config files: a JSON object whose top-level keys are global flags,
/// and whose nested objects hold the flags of one subcommand each.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
    json j = json::object();
    for (const CLI::Option* opt : app->get_options()) {
      if (!opt->get_configurable() || opt->get_lnames().empty()) continue;
      const auto& name = opt->get_lnames().front();
      if (opt->count() > 0)
        j[name] = opt->results();
      else if (default_also && !opt->get_default_str().empty())
        j[name] = opt->get_default_str();
    }
    return j.dump(2);
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw CLI::ConversionError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config must be a JSON object");
    std::vector<CLI::ConfigItem> items;
    collect(j, {}, items);
    return items;
  }

 private:
  static std::string scalar(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return v.dump();
  }

  static void collect(const json& j, const std::vector<std::string>& parents, std::vector<CLI::ConfigItem>& items) {
    for (const auto& [key, value] : j.items()) {
      if (value.is_object()) {
        auto sub = parents;
        sub.push_back(key);
        collect(value, sub, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array())
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      else
        item.inputs.push_back(scalar(value));
      items.push_back(std::move(item));
    }
  }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  auto out = csv::open_out(path);
  out << text;
  if (!out) throw IoError("failed writing " + path);
}

struct Manifest {
  std::string command;
  const CLI::App* sub = nullptr;
  json seeds = json::object();
  json inputs = json::array();
  json outputs = json::array();
  json extra = json::object();

  void input(const std::string& path) { inputs.push_back({{"path", path}, {"fnv1a64", fnv1a64(read_file(path))}}); }

  void output(const std::string& path) {
    outputs.push_back({{"path", fs::path(path).filename().string()}, {"fnv1a64", fnv1a64(read_file(path))}});
  }

  json arguments() const {
    json args = json::object();
    for (const CLI::Option* opt : sub->get_options()) {
      if (opt->get_name() == "--help" || opt->get_name() == "--config" || opt->get_name().empty()) continue;
      const auto key = opt->get_lnames().empty() ? opt->get_name() : opt->get_lnames().front();
      if (opt->count() > 0) {
        const auto& r = opt->results();
        args[key] = r.size() == 1 ? json(r[0]) : json(r);
      } else if (opt->get_expected_min() == 0) {
        args[key] = false;
      } else {
        args[key] = opt->get_default_str();
      }
    }
    return args;
  }

  void write(const std::string& path) const {
    json j = {{"tool", "trigfit"},
              {"version", kVersion},
              {"command", command},
              {"arguments", arguments()},
              {"seeds", seeds},
              {"inputs", inputs},
              {"outputs", outputs}};
    for (const auto& [k, v] : extra.items()) j[k] = v;
    write_text(path, j.dump(2) + "\n");
  }
};

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir);
}

std::string file_safe(std::string name) {
  for (char& c : name)
    if (c == ':' || c == '/') c = '_';
  return name;
}

FeatureSpec parse_spec_token(const std::string& token) {
  auto int_field = [&](const std::string& s) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw InvalidArgument("bad integer in spec '" + token + "'");
    return v;
  };
  if (token == "linear") return linear_spec();
  if (token == "trig") return trig_spec();
  if (token.rfind("poly:", 0) == 0) return poly_spec(int_field(token.substr(5)));
  if (token.rfind("product:", 0) == 0) {
    const auto rest = token.substr(8);
    const auto colon = rest.find(':');
    if (colon == std::string::npos) throw InvalidArgument("product spec needs product:degree:order");
    return product_spec(int_field(rest.substr(0, colon)), int_field(rest.substr(colon + 1)));
  }
  throw InvalidArgument("unknown spec '" + token + "' (expected linear, trig, poly:d or product:d:m)");
}

struct GenerateArgs {
  std::string kind;
  std::uint64_t seed = 0;
  int terms = 4;
  int max_terms = 10;
  int degree = 2;
  std::string out;
};

int run_generate(const GenerateArgs& a, Manifest& m) {
  Expression e;
  if (a.kind == "trig")
    e = gen_trig_function(a.seed, a.terms);
  else
    e = gen_mixed_function(a.seed, a.max_terms, a.degree);
  const auto text = format_expression(e);
  m.seeds["seed"] = a.seed;
  if (a.out.empty()) {
    std::cout << text << '\n';
    return kOk;
  }
  write_text(a.out, text + "\n");
  m.output(a.out);
  m.write(a.out + ".manifest.json");
  return kOk;
}

struct FitArgs {
  std::string expr;
  std::vector<double> range{-std::numbers::pi, std::numbers::pi};
  double step = 0.01;
  std::vector<std::string> specs{"linear", "poly:2", "trig"};
  std::uint64_t split_seed = 0;
  double test_fraction = 0.2;
  double guard = kDefaultGuard;
  double ridge = 0.0;
  std::string out_dir = "fit_out";
};

int run_fit(const FitArgs& a, Manifest& m) {
  std::vector<FeatureSpec> specs;
  for (const auto& t : a.specs) specs.push_back(parse_spec_token(t));
  if (a.range.size() != 2 || !(a.range[0] < a.range[1])) throw InvalidArgument("--range needs lo < hi");

  const auto expr = parse_expression(read_file(a.expr));
  m.input(a.expr);
  ComparisonOptions opt;
  opt.seed = a.split_seed;
  opt.test_fraction = a.test_fraction;
  opt.guard = a.guard;
  opt.ridge = a.ridge;
  const auto cmp = run_comparison(expr, a.range[0], a.range[1], a.step, specs, opt);

  ensure_dir(a.out_dir);
  const auto dir = fs::path(a.out_dir);
  {
    auto out = csv::open_out((dir / "error_table.csv").string());
    write_error_table_csv(cmp.reports, out);
  }
  m.output((dir / "error_table.csv").string());

  std::vector<char> in_test(cmp.data.size(), 0);
  for (auto i : cmp.split.test_indices) in_test[i] = 1;
  for (std::size_t s = 0; s < specs.size(); ++s) {
    const auto pred = predict(cmp.models[s], cmp.data.xs, a.guard);
    const auto path = (dir / ("predictions_" + file_safe(specs[s].name) + ".csv")).string();
    auto out = csv::open_out(path);
    out << "x,y_true,y_pred,set\n";
    for (std::size_t k = 0; k < pred.kept_row_indices.size(); ++k) {
      const auto i = pred.kept_row_indices[k];
      out << csv::num(cmp.data.xs[i]) << ',' << csv::num(cmp.data.ys[i]) << ',' << csv::num(pred.values[k]) << ','
          << (in_test[i] ? "test" : "train") << '\n';
    }
    out.close();
    m.output(path);
  }

  json reports = json::array();
  for (const auto& r : cmp.reports) reports.push_back(to_json(r));
  const json report = {{"expression", format_expression(expr)},
                       {"range", a.range},
                       {"step", a.step},
                       {"n_samples", cmp.data.size()},
                       {"n_train", cmp.split.train.size()},
                       {"n_test", cmp.split.test.size()},
                       {"manifest", "manifest.json"},
                       {"reports", reports}};
  write_text((dir / "report.json").string(), report.dump(2) + "\n");
  m.output((dir / "report.json").string());
  m.seeds["split_seed"] = a.split_seed;
  m.write((dir / "manifest.json").string());

  for (const auto& r : cmp.reports)
    std::printf("%-16s test_abs_error=%.17g%s\n", r.spec_name.c_str(), r.test_abs_error,
                r.ridge_fallback ? " (ridge fallback)" : "");
  return kOk;
}

struct DecomposeArgs {
  std::string wav;
  std::size_t frames = 800;
  std::size_t frame_len = 1000;
  std::size_t waves = 20;
  std::size_t passes = 10;
  double step = 1.0;
  std::string mode = "independent";
  std::string update_order = "simultaneous";
  std::vector<double> init{1.0, 1.0, 0.0};
  double rate_divisor = 44100.0;
  bool use_header_rate = false;
  bool per_frame_norm = false;
  bool no_amplitude = false;
  bool divide = false;
  std::size_t threads = 0;
  std::string out_dir = "decompose_out";
};

int run_decompose(const DecomposeArgs& a, Manifest& m) {
  FitConfig cfg;
  cfg.n_waves = a.waves;
  cfg.passes = a.passes;
  cfg.step = a.step;
  cfg.mode = parse_mode(a.mode);
  cfg.order = parse_order(a.update_order);
  if (a.init.size() != 3) throw InvalidArgument("--init needs amplitude frequency phase");
  cfg.init = {a.init[0], a.init[1], a.init[2]};
  cfg.include_amplitude_in_resynthesis = !a.no_amplitude;
  cfg.divide_by_n_waves = a.divide;
  cfg.validate();

  const auto signal = load_wav_left(a.wav);
  m.input(a.wav);
  DecomposeOptions opt;
  opt.n_frames = a.frames;
  opt.frame_len = a.frame_len;
  opt.rate_divisor = a.use_header_rate ? static_cast<double>(signal.sample_rate) : a.rate_divisor;
  opt.scope = a.per_frame_norm ? NormScope::PerFrame : NormScope::Global;
  opt.threads = a.threads;
  const auto d = decompose(signal, cfg, opt);

  ensure_dir(a.out_dir);
  const auto dir = fs::path(a.out_dir);
  auto fits = to_json(d);
  fits["manifest"] = "manifest.json";
  write_text((dir / "fits.json").string(), fits.dump(1) + "\n");
  m.output((dir / "fits.json").string());

  {
    auto out = csv::open_out((dir / "losses.csv").string());
    out << "frame,start_index,frame_loss,diverged\n";
    for (std::size_t k = 0; k < d.frames.size(); ++k)
      out << k << ',' << d.frames[k].start_index << ',' << csv::num(d.frames[k].frame_loss) << ','
          << (d.frames[k].diverged ? 1 : 0) << '\n';
  }
  m.output((dir / "losses.csv").string());

  {
    const auto synth = resynthesize(d);
    auto out = csv::open_out((dir / "trace.csv").string());
    out << "index,time,original,fitted,resynthesized\n";
    for (const auto& f : d.frames) {
      const auto times = d.axis.times(f.start_index, d.frame_len);
      for (std::size_t i = 0; i < d.frame_len; ++i) {
        const auto idx = f.start_index + i;
        out << idx << ',' << csv::num(times[i]) << ',' << csv::num(signal.samples[idx]) << ','
            << csv::num(f.final_h[i]) << ',' << csv::num(synth.signal.samples[idx]) << '\n';
      }
    }
  }
  m.output((dir / "trace.csv").string());

  m.extra["effective"] = {{"rate_divisor", opt.rate_divisor},
                          {"threads", opt.threads},
                          {"config", to_json(cfg)},
                          {"n_frames", opt.n_frames},
                          {"frame_len", opt.frame_len}};
  m.write((dir / "manifest.json").string());
  std::printf("frames=%zu diverged=%zu\n", d.frames.size(), d.diverged_count());
  return kOk;
}

struct SynthArgs {
  std::string fits;
  std::string out;
  bool no_amplitude = false;
  bool divide = false;
};

int run_synth(const SynthArgs& a, Manifest& m) {
  json j;
  try {
    j = json::parse(read_file(a.fits));
  } catch (const json::exception& e) {
    throw FormatError(std::string("fits file is not JSON: ") + e.what());
  }
  m.input(a.fits);
  const auto d = decomposition_from_json(j);
  const auto r = resynthesize(d.frames, d.frame_len, d.axis, !a.no_amplitude, a.divide, d.sample_rate);
  write_wav(r.signal, a.out);
  m.output(a.out);
  m.extra["clamped_samples"] = r.clamped;
  m.write(a.out + ".manifest.json");
  std::printf("clamped=%zu\n", r.clamped);
  return kOk;
}

std::vector<double> read_named_column(const std::string& path, const std::string& name) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string first;
  std::getline(in, first);
  const auto cells = csv::split_line(first);
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (cells[i] == name) return csv::read_column(path, static_cast<int>(i));
  return csv::read_column(path, -1);
}

int run_eval(const std::string& pred_path, const std::string& true_path) {
  const auto pred = read_named_column(pred_path, "y_pred");
  const auto truth = read_named_column(true_path, "y_true");
  if (pred.size() != truth.size())
    throw InvalidArgument("length mismatch: " + std::to_string(pred.size()) + " predictions vs " +
                          std::to_string(truth.size()) + " targets");
  std::printf("%.17g\n", absolute_error(pred, truth));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feature-augmented regression and sine-wave decomposition", "trigfit"};
  app.set_version_flag("--version", std::string("trigfit ") + kVersion);
  app.set_config("--config", "", "JSON file with flag values, one nested object per subcommand");
  app.config_formatter(std::make_shared<JsonConfig>());
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Draw a random expression");
  g->add_option("kind", gen.kind, "trig or mixed")->required()->check(CLI::IsMember({"trig", "mixed"}));
  g->add_option("--seed", gen.seed, "PRNG seed")->capture_default_str();
  g->add_option("--terms", gen.terms, "Number of terms (trig)")->capture_default_str()->check(CLI::PositiveNumber);
  g->add_option("--max-terms", gen.max_terms, "Maximum number of terms (mixed)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  g->add_option("--degree", gen.degree, "Highest power of x in the pool (mixed)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  g->add_option("--out", gen.out, "Output file (stdout when omitted)");

  FitArgs fit;
  auto* f = app.add_subcommand("fit", "Fit feature specs to a sampled expression");
  f->add_option("--expr", fit.expr, "Expression file")->required();
  f->add_option("--range", fit.range, "Sampling interval lo hi")->expected(2)->capture_default_str();
  f->add_option("--step", fit.step, "Grid step")->capture_default_str()->check(CLI::PositiveNumber);
  f->add_option("--spec", fit.specs, "linear, trig, poly:d or product:d:m (repeatable)")
      ->capture_default_str()
      ->check(CLI::Validator(
          [](std::string& token) {
            try {
              parse_spec_token(token);
            } catch (const Error& err) {
              return std::string(err.what());
            }
            return std::string();
          },
          "SPEC", "spec token"));
  f->add_option("--split-seed", fit.split_seed, "Train/test shuffle seed")->capture_default_str();
  f->add_option("--test-fraction", fit.test_fraction, "Share of samples held out")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  f->add_option("--guard", fit.guard, "Minimum distance from log/tan singularities")->capture_default_str();
  f->add_option("--ridge", fit.ridge, "Ridge penalty (intercept excluded)")->capture_default_str();
  f->add_option("--out-dir", fit.out_dir, "Output directory")->capture_default_str();

  DecomposeArgs dec;
  auto* d = app.add_subcommand("decompose", "Fit sine waves to frames of a WAV file");
  d->add_option("--wav", dec.wav, "Input WAV (16-bit PCM)")->required();
  d->add_option("--frames", dec.frames, "Number of frames")->capture_default_str()->check(CLI::PositiveNumber);
  d->add_option("--frame-len", dec.frame_len, "Samples per frame")->capture_default_str()->check(CLI::PositiveNumber);
  d->add_option("--waves", dec.waves, "Sine waves per frame")->capture_default_str()->check(CLI::PositiveNumber);
  d->add_option("--passes", dec.passes, "Passes over each frame")->capture_default_str()->check(CLI::PositiveNumber);
  d->add_option("--step", dec.step, "Learning rate")->capture_default_str()->check(CLI::PositiveNumber);
  d->add_option("--mode", dec.mode, "independent or dependent")
      ->capture_default_str()
      ->check(CLI::IsMember({"independent", "dependent"}));
  d->add_option("--update-order", dec.update_order, "simultaneous or sequential")
      ->capture_default_str()
      ->check(CLI::IsMember({"simultaneous", "sequential"}));
  d->add_option("--init", dec.init, "Initial amplitude frequency phase")->expected(3)->capture_default_str();
  d->add_option("--rate-divisor", dec.rate_divisor, "Divisor turning sample indices into seconds")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  d->add_flag("--use-header-rate", dec.use_header_rate, "Use the WAV sample rate as the divisor");
  d->add_flag("--per-frame-norm", dec.per_frame_norm, "Standardize times inside each frame");
  d->add_flag("--no-amplitude", dec.no_amplitude, "Resynthesize trace.csv with unit amplitudes");
  d->add_flag("--divide", dec.divide, "Divide the resynthesized superposition by the wave count");
  d->add_option("--threads", dec.threads, "Worker threads (0 = all cores)")
      ->envname("TRIGFIT_THREADS")
      ->capture_default_str();
  d->add_option("--out-dir", dec.out_dir, "Output directory")->capture_default_str();

  SynthArgs syn;
  auto* s = app.add_subcommand("synth", "Resynthesize audio from fits.json");
  s->add_option("--fits", syn.fits, "fits.json from decompose")->required();
  s->add_option("--out", syn.out, "Output WAV")->required();
  s->add_flag("--no-amplitude", syn.no_amplitude, "Ignore fitted amplitudes");
  s->add_flag("--divide", syn.divide, "Divide the superposition by the wave count");

  std::string pred_csv, true_csv;
  auto* e = app.add_subcommand("eval", "Sum of absolute deviations between two CSV columns");
  e->add_option("pred_csv", pred_csv, "Predictions (column y_pred, else the last column)")->required();
  e->add_option("true_csv", true_csv, "Targets (column y_true, else the last column)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? kOk : kArgError;
  }

  try {
    Manifest m;
    if (g->parsed()) {
      m.command = "generate";
      m.sub = g;
      return run_generate(gen, m);
    }
    if (f->parsed()) {
      m.command = "fit";
      m.sub = f;
      return run_fit(fit, m);
    }
    if (d->parsed()) {
      m.command = "decompose";
      m.sub = d;
      return run_decompose(dec, m);
    }
    if (s->parsed()) {
      m.command = "synth";
      m.sub = s;
      return run_synth(syn, m);
    }
    return run_eval(pred_csv, true_csv);
  } catch (const InvalidArgument& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kArgError;
  } catch (const DomainError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kArgError;
  } catch (const ParseError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kIoError;
  } catch (const IoError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kIoError;
  } catch (const FormatError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kIoError;
  } catch (const Error& err) {
    std::cerr << "numerical failure: " << err.what() << '\n';
    return kNumericError;
  }
}
