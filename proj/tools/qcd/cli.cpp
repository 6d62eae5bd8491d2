#include "qcd/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "qcd/bounds.hpp"
#include "qcd/errors.hpp"
#include "qcd/harness.hpp"
#include "qcd/svg.hpp"
#include "qcd/table.hpp"

namespace qcd::cli {
namespace {

struct Options {
  std::string detector = "tvt-cusum";
  std::vector<std::string> detectors;
  double mu0 = 0.0;
  double mu1 = 1.0;
  double sigma2 = 1.0;
  std::int64_t horizon = 5000;
  std::int64_t m = 0;
  std::optional<std::int64_t> window;
  double delta_f = 0.01;
  double delta_d = 0.01;
  double r = 2.0;
  std::optional<double> b;
  std::int64_t trials = 20000;
  std::string change_points = "auto";
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string format = "csv";
  std::string out;
  std::string summary;
  std::string input = "-";
  std::string preset;
  std::vector<std::int64_t> horizons;
  std::optional<std::int64_t> m_gap;
  bool trace = false;
  bool allow_expensive = false;
  bool record_timing = false;
};

Format parse_format(const std::string& text) {
  if (text == "csv") return Format::csv;
  if (text == "json") return Format::json;
  throw InvalidParameter("--format must be csv or json");
}

// Opens `path` for writing; "-" or empty selects `fallback`.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty() && path != "-") {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw std::runtime_error("cannot write " + path);
      stream_ = &file_;
    }
  }
  std::ostream& get() { return *stream_; }
  void finish(const std::string& path) {
    stream_->flush();
    if (!*stream_) throw std::runtime_error("write failed for " + (path.empty() ? "-" : path));
  }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

DetectorSpec detector_spec(const Options& o, DetectorKind kind) {
  DetectorSpec spec;
  spec.kind = kind;
  spec.delta_f = o.delta_f;
  spec.r = o.r;
  spec.constant_threshold = o.b;
  spec.window = o.window;
  spec.sigma2 = o.sigma2;
  return spec;
}

std::vector<std::int64_t> parse_change_points(const std::string& text) {
  if (text.empty() || text == "auto") return {};
  std::vector<std::int64_t> points;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    std::int64_t v = 0;
    try {
      v = std::stoll(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) {
      throw InvalidParameter("--change-points: '" + item + "' is not an integer");
    }
    points.push_back(v);
  }
  return points;
}

ExperimentConfig experiment_config(const Options& o, DetectorKind kind) {
  ExperimentConfig cfg;
  cfg.detector = detector_spec(o, kind);
  cfg.model = GaussianPair(o.mu0, o.mu1, o.sigma2);
  cfg.horizon = o.horizon;
  cfg.prechange_window = o.m;
  cfg.delta_d = o.delta_d;
  cfg.trials = o.trials;
  cfg.change_points = parse_change_points(o.change_points);
  cfg.master_seed = o.seed;
  cfg.threads = o.threads;
  cfg.allow_expensive = o.allow_expensive;
  return cfg;
}

Cell optional_int(const std::optional<std::int64_t>& v) {
  return v ? Cell(*v) : Cell(std::monostate{});
}

Cell optional_double(const std::optional<double>& v) {
  return v ? Cell(*v) : Cell(std::monostate{});
}

Cell delay_cell(Delay d) { return d.finite() ? Cell(d.steps()) : Cell(std::monostate{}); }

Table results_table() {
  return Table{{"detector", "T", "m", "window", "delta_f", "delta_d", "r", "nu", "trial",
                "stop_time", "delay"},
               {}};
}

Table summary_table() {
  return Table{{"detector", "T", "m", "window", "trials", "empirical_latency", "empirical_fa",
                "fa_stderr", "lower_bound", "upper_bound", "wall_time_seconds", "master_seed"},
               {}};
}

void append_results(Table& table, const HorizonRow& row) {
  const auto& cfg = row.config;
  const std::string name(to_string(cfg.detector.kind));
  auto add = [&](const RunOutcome& o) {
    table.add({name, cfg.horizon, cfg.prechange_window, optional_int(cfg.detector.window),
               cfg.detector.delta_f, cfg.delta_d, cfg.detector.r, optional_int(o.change_point),
               o.trial, optional_int(o.stop_time), o.change_point ? delay_cell(o.delay()) : Cell()});
  };
  for (const auto& point : row.latency.per_change_point) {
    for (const auto& o : point.outcomes) add(o);
  }
  for (const auto& o : row.false_alarm.outcomes) add(o);
}

void append_summary(Table& table, const HorizonRow& row, bool record_timing) {
  const auto& cfg = row.config;
  table.add({std::string(to_string(cfg.detector.kind)), cfg.horizon, cfg.prechange_window,
             optional_int(cfg.detector.window), cfg.trials,
             delay_cell(row.latency.empirical_latency), row.false_alarm.rate,
             row.false_alarm.std_error, optional_double(row.lower_bound),
             optional_double(row.upper_bound),
             record_timing ? Cell(row.wall_time_seconds) : Cell(),
             static_cast<std::int64_t>(cfg.master_seed)});
}

void print_human_summary(const std::vector<HorizonRow>& rows, std::ostream& out) {
  out << std::left << std::setw(11) << "detector" << std::right << std::setw(8) << "T"
      << std::setw(10) << "latency" << std::setw(10) << "lower" << std::setw(10) << "upper"
      << std::setw(10) << "FA" << '\n';
  for (const auto& row : rows) {
    auto num = [](const std::optional<double>& v) {
      if (!v) return std::string("-");
      std::ostringstream s;
      s << std::fixed << std::setprecision(1) << *v;
      return s.str();
    };
    const auto lat = row.latency.empirical_latency;
    out << std::left << std::setw(11) << to_string(row.config.detector.kind) << std::right
        << std::setw(8) << row.config.horizon << std::setw(10)
        << (lat.finite() ? std::to_string(lat.steps()) : std::string("inf")) << std::setw(10)
        << num(row.lower_bound) << std::setw(10) << num(row.upper_bound) << std::setw(10)
        << std::fixed << std::setprecision(4) << row.false_alarm.rate << '\n';
  }
}

// Writes result/summary tables for a finished sweep and prints the summary.
void emit_sweep(const Options& o, const std::vector<HorizonRow>& rows, std::ostream& out,
                std::ostream& err) {
  const Format format = parse_format(o.format);
  bool stdout_taken = false;
  if (!o.out.empty()) {
    Table results = results_table();
    for (const auto& row : rows) append_results(results, row);
    Sink sink(o.out, out);
    write_table(results, format, sink.get());
    sink.finish(o.out);
    stdout_taken = stdout_taken || o.out == "-";
  }
  if (!o.summary.empty()) {
    Table summary = summary_table();
    for (const auto& row : rows) append_summary(summary, row, o.record_timing);
    Sink sink(o.summary, out);
    write_table(summary, format, sink.get());
    sink.finish(o.summary);
    stdout_taken = stdout_taken || o.summary == "-";
  }
  print_human_summary(rows, stdout_taken ? err : out);
}

int cmd_detect(const Options& o, std::istream& in, std::ostream& out) {
  const DetectorKind kind = parse_detector_kind(o.detector);
  std::optional<GaussianPair> model;
  if (uses_model(kind)) model = GaussianPair(o.mu0, o.mu1, o.sigma2);
  DetectorSpec spec = detector_spec(o, kind);
  Detector detector(spec, model);

  std::ifstream file;
  std::istream* source = &in;
  if (o.input != "-") {
    file.open(o.input);
    if (!file) throw std::runtime_error("cannot read " + o.input);
    source = &file;
  }

  if (o.trace) out << "n,x,statistic,threshold\n";
  std::string line;
  std::int64_t line_no = 0;
  std::optional<StepReport> last;
  while (std::getline(*source, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    const auto last_char = line.find_last_not_of(" \t");
    const std::string token = line.substr(first, last_char - first + 1);
    double x = 0.0;
    std::size_t used = 0;
    try {
      x = std::stod(token, &used);
    } catch (const std::out_of_range&) {
      throw DataError("line " + std::to_string(line_no) + ": value '" + token + "' is out of range");
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size() || used == 0) {
      throw DataError("line " + std::to_string(line_no) + ": cannot parse '" + token +
                      "' as a number");
    }
    if (!std::isfinite(x)) {
      throw DataError("line " + std::to_string(line_no) + ": non-finite value '" + token + "'");
    }
    last = detector.step(x);
    if (o.trace) {
      out << detector.count() << ',' << format_double(x) << ',' << format_double(last->statistic)
          << ',' << format_double(last->threshold) << '\n';
    }
    if (last->stopped) {
      out << "stopped at n=" << detector.count() << " (line " << line_no
          << ") statistic=" << format_double(last->statistic)
          << " threshold=" << format_double(last->threshold) << '\n';
      return kExitOk;
    }
  }
  out << "reached end of input after " << detector.count() << " observations without a stop";
  if (last) out << " (last statistic=" << format_double(last->statistic) << ")";
  out << '\n';
  return kExitNoStop;
}

int cmd_bounds(const Options& o, std::ostream& out) {
  BoundQuery q;
  q.horizon = o.horizon;
  q.delta_f = o.delta_f;
  q.delta_d = o.delta_d;
  q.r = o.r;
  q.model = GaussianPair(o.mu0, o.mu1, o.sigma2);
  q.prechange_window = o.m;
  std::vector<DetectorKind> kinds;
  for (const auto& name : o.detectors) kinds.push_back(parse_detector_kind(name));
  if (kinds.empty()) {
    kinds = {DetectorKind::tvt_cusum, DetectorKind::tvt_sr, DetectorKind::glr, DetectorKind::gsr};
  }
  Table table{{"bound", "detector", "T", "delta_f", "delta_d", "r", "m", "mu0", "mu1", "sigma2",
               "value"},
              {}};
  for (const auto& row : tabulate_bounds(q, kinds)) {
    const auto& in = row.inputs;
    const bool integral = row.bound != "lower_bound" && row.bound != "tvt_upper_bound";
    table.add({row.bound, std::string(to_string(row.detector)), in.horizon, in.delta_f,
               in.delta_d, in.r, in.prechange_window, in.model.mu0(), in.model.mu1(),
               in.model.sigma2(),
               integral ? Cell(static_cast<std::int64_t>(row.value)) : Cell(row.value)});
  }
  Sink sink(o.out, out);
  write_table(table, parse_format(o.format), sink.get());
  sink.finish(o.out);
  return kExitOk;
}

int cmd_simulate(const Options& o, std::ostream& out, std::ostream& err) {
  const ExperimentConfig cfg = experiment_config(o, parse_detector_kind(o.detector));
  SweepOptions options;
  options.keep_outcomes = !o.out.empty();
  const std::int64_t horizons[] = {cfg.horizon};
  emit_sweep(o, experiment_latency_vs_horizon(cfg, horizons, options), out, err);
  return kExitOk;
}

int cmd_experiment(const Options& o, std::ostream& out, std::ostream& err) {
  std::vector<SweepPlan> plans;
  if (o.preset.empty()) {
    SweepPlan plan{experiment_config(o, parse_detector_kind(o.detector)), {}};
    plan.options.prechange_gap = o.m_gap;
    plans.push_back(plan);
  } else if (o.preset == "figure1") {
    plans = figure1_preset(o.trials, o.seed, o.threads);
  } else {
    throw InvalidParameter("unknown preset '" + o.preset + "' (available: figure1)");
  }
  std::vector<std::int64_t> horizons = o.horizons;
  if (horizons.empty()) {
    if (o.preset.empty()) {
      horizons = {o.horizon};
    } else {
      horizons.assign(std::begin(kFigure1Horizons), std::end(kFigure1Horizons));
    }
  }
  // Validate every (plan, horizon) before spending time on any of them.
  for (auto& plan : plans) {
    plan.base.allow_expensive = o.allow_expensive;
    plan.options.keep_outcomes = !o.out.empty();
    for (const auto horizon : horizons) validate(config_at_horizon(plan.base, horizon, plan.options));
  }
  std::vector<HorizonRow> rows;
  for (const auto& plan : plans) {
    auto part = experiment_latency_vs_horizon(plan.base, horizons, plan.options);
    std::move(part.begin(), part.end(), std::back_inserter(rows));
  }
  emit_sweep(o, rows, out, err);
  return kExitOk;
}

int cmd_plot(const Options& o, std::ostream& out) {
  if (o.summary.empty()) throw InvalidParameter("plot needs --summary PATH");
  std::ifstream file(o.summary);
  if (!file) throw std::runtime_error("cannot read " + o.summary);
  const TextTable summary = read_csv(file);
  const auto series = latency_series(summary);
  Sink sink(o.out, out);
  write_svg(series, "Latency vs horizon", sink.get());
  sink.finish(o.out);
  return kExitOk;
}

void add_model_flags(CLI::App& cmd, Options& o) {
  cmd.add_option("--mu0", o.mu0, "pre-change mean")->capture_default_str();
  cmd.add_option("--mu1", o.mu1, "post-change mean")->capture_default_str();
  cmd.add_option("--sigma2", o.sigma2, "noise variance (sub-Gaussian parameter for glr/gsr)")
      ->capture_default_str();
}

void add_detector_flags(CLI::App& cmd, Options& o) {
  cmd.add_option("--detector", o.detector, "cusum, sr, tvt-cusum, tvt-sr, glr or gsr")
      ->capture_default_str();
  cmd.add_option("--delta-f", o.delta_f, "false-alarm level")->capture_default_str();
  cmd.add_option("--r", o.r, "TVT exponent (> 1)")->capture_default_str();
  cmd.add_option("--b", o.b,
                 "constant threshold; required for cusum/sr, overrides the schedule otherwise "
                 "(for sr it applies to log S_n)");
  cmd.add_option("--window", o.window, "GLR window W (glr only)");
  add_model_flags(cmd, o);
}

void add_run_flags(CLI::App& cmd, Options& o) {
  cmd.add_option("--T", o.horizon, "horizon")->capture_default_str();
  cmd.add_option("--m", o.m, "pre-change window; change points start at m + 1")
      ->capture_default_str();
  cmd.add_option("--delta-d", o.delta_d, "detection-delay level")->capture_default_str();
  cmd.add_option("--trials", o.trials, "trials per change point and for the false-alarm estimate")
      ->capture_default_str();
  cmd.add_option("--change-points", o.change_points, "comma-separated list, or auto")
      ->capture_default_str();
  cmd.add_option("--seed", o.seed, "master seed")->capture_default_str();
  cmd.add_option("--threads", o.threads, "worker threads (0 = all cores); output never depends on it")
      ->capture_default_str();
  cmd.add_option("--format", o.format, "csv or json")->capture_default_str();
  cmd.add_option("--out", o.out, "per-trial results table (- for stdout)");
  cmd.add_option("--summary", o.summary, "per-(detector, T) summary table (- for stdout)");
  cmd.add_flag("--allow-expensive", o.allow_expensive, "lift the gsr horizon cap");
  cmd.add_flag("--record-timing", o.record_timing,
               "fill wall_time_seconds in the summary (makes output run-dependent)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err) {
  Options o;
  CLI::App app("Quickest change detection: detectors, bounds and Monte Carlo experiments", "qcd");
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "help for every subcommand");

  auto* detect = app.add_subcommand("detect", "run a detector over one observation per line");
  add_detector_flags(*detect, o);
  detect->add_option("--input", o.input, "observation file (- for stdin)")->capture_default_str();
  detect->add_flag("--trace", o.trace, "print n, x, statistic and threshold for every step");

  auto* bounds = app.add_subcommand("bounds", "tabulate the latency bounds");
  add_model_flags(*bounds, o);
  bounds->add_option("--detector", o.detectors, "detector kinds (default: tvt-cusum tvt-sr glr gsr)")
      ->delimiter(',');
  bounds->add_option("--T", o.horizon, "horizon")->capture_default_str();
  bounds->add_option("--m", o.m, "pre-change window for the glr/gsr bound")->capture_default_str();
  bounds->add_option("--delta-f", o.delta_f, "false-alarm level")->capture_default_str();
  bounds->add_option("--delta-d", o.delta_d, "detection-delay level")->capture_default_str();
  bounds->add_option("--r", o.r, "TVT exponent (> 1)")->capture_default_str();
  bounds->add_option("--format", o.format, "csv or json")->capture_default_str();
  bounds->add_option("--out", o.out, "output path (default stdout)");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo latency and false alarm at one T");
  add_detector_flags(*simulate, o);
  add_run_flags(*simulate, o);

  auto* experiment =
      app.add_subcommand("experiment", "latency-vs-horizon sweep (optionally a preset)");
  add_detector_flags(*experiment, o);
  add_run_flags(*experiment, o);
  experiment->add_option("--preset", o.preset, "figure1");
  experiment->add_option("--horizons", o.horizons, "comma-separated horizons")->delimiter(',');
  experiment->add_option("--m-gap", o.m_gap, "set m = T - gap at each horizon");

  auto* plot = app.add_subcommand("plot", "SVG chart of latency and bounds vs log10 T");
  plot->add_option("--summary", o.summary, "summary CSV written by simulate/experiment")
      ->required();
  plot->add_option("--out", o.out, "SVG output path (default stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitError;
  }

  try {
    if (detect->parsed()) return cmd_detect(o, in, out);
    if (bounds->parsed()) return cmd_bounds(o, out);
    if (simulate->parsed()) return cmd_simulate(o, out, err);
    if (experiment->parsed()) return cmd_experiment(o, out, err);
    if (plot->parsed()) return cmd_plot(o, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

}  // namespace qcd::cli
