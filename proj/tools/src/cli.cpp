#include "tactile_cli/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "tactile/experiments.hpp"
#include "tactile/link.hpp"
#include "tactile/optics.hpp"
#include "tactile/record_log.hpp"
#include "tactile/reflex.hpp"
#include "tactile/synth.hpp"
#include "tactile_cli/liquid.hpp"
#include "tactile_cli/report.hpp"

namespace tactile::cli {

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::kIoError:
      return kExitIo;
    case Errc::kNoTapsFound:
    case Errc::kEmptyDataset:
    case Errc::kInsufficientData:
    case Errc::kNoPeaksFound:
      return kExitEmpty;
    case Errc::kParseError:
    case Errc::kConfigError:
    case Errc::kInvalidArgument:
    case Errc::kBadMagic:
    case Errc::kVersionMismatch:
    case Errc::kTruncatedChunk:
    case Errc::kUnknownKind:
    case Errc::kShapeMismatch:
    case Errc::kZeroRate:
    case Errc::kZeroChannels:
    case Errc::kOverlappingEvents:
    case Errc::kMissingModality:
    case Errc::kNyquistViolation:
    case Errc::kBudgetTooSmall:
      return kExitConfig;
    default:
      return kExitFailure;
  }
}

namespace {

namespace fs = std::filesystem;

// Options every subcommand accepts.
struct Common {
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "csv";
  std::string config_path;
  bool quiet = false;
  std::vector<CLI::Option*> seed_opts;
  std::vector<CLI::Option*> format_opts;

  bool given(const std::vector<CLI::Option*>& opts) const {
    return std::any_of(opts.begin(), opts.end(), [](const CLI::Option* o) { return o->count() > 0; });
  }
  bool seed_given() const { return given(seed_opts); }
  bool format_given() const { return given(format_opts); }
};

// Flag values win over the --config file, which wins over built-in defaults.
class Settings {
 public:
  void load(const std::string& path) {
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw Error(Errc::kIoError, "cannot open config " + path);
    try {
      json_ = Json::parse(in);
    } catch (const Json::parse_error& e) {
      throw Error(Errc::kConfigError, path + ": " + e.what());
    }
    if (!json_.is_object()) throw Error(Errc::kConfigError, path + ": top level must be an object");
  }

  template <typename T>
  void merge(const CLI::Option* opt, const char* key, T& value) const {
    merge(opt && opt->count() > 0, key, value);
  }
  template <typename T>
  void merge(bool given, const char* key, T& value) const {
    if (given || !json_.contains(key)) return;
    try {
      value = json_.at(key).get<T>();
    } catch (const Json::exception& e) {
      throw Error(Errc::kConfigError, std::string("config key '") + key + "': " + e.what());
    }
  }

 private:
  Json json_ = Json::object();
};

void add_common(CLI::App* sub, Common& c) {
  c.seed_opts.push_back(sub->add_option("--seed", c.seed, "Base seed of every random stream"));
  sub->add_option("--out", c.out, "Output file (default: $" + std::string(kOutDirEnv) + "/<name>, else stdout)");
  c.format_opts.push_back(
      sub->add_option("--format", c.format, "Report format")->check(CLI::IsMember({"csv", "json"})));
  sub->add_option("--config", c.config_path, "JSON file with default values for the flags");
  sub->add_flag("--quiet", c.quiet, "Suppress the terminal summary");
}

Format parse_format(const std::string& s) {
  if (s == "json") return Format::kJson;
  if (s == "csv") return Format::kCsv;
  throw Error(Errc::kConfigError, "unknown format '" + s + "'");
}

std::vector<std::string> split(const std::string& text, const std::string& seps = ",") {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    if (seps.find(ch) != std::string::npos) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (ch != ' ') {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(Errc::kIoError, "cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw Error(Errc::kIoError, "write failed for " + path.string());
}

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// --out, else the environment directory, else empty (stdout).
std::string output_path(const Common& c, const std::string& default_name) {
  if (!c.out.empty()) return c.out;
  if (const char* dir = std::getenv(kOutDirEnv); dir && *dir) return (fs::path(dir) / default_name).string();
  return {};
}

void emit(const Report& r, const Common& c, std::ostream& out) {
  const Format fmt = parse_format(c.format);
  const std::string path = output_path(c, r.command + (fmt == Format::kJson ? ".json" : ".csv"));
  if (path.empty()) {
    out << r.render(fmt);
    return;
  }
  write_text(path, r.render(fmt));
  if (c.quiet) return;
  for (const auto& t : r.tables) out << pretty_table(t) << "\n";
  out << "report: " << path << " (seed " << r.seed << ", config " << r.config_hash() << ")\n";
}

std::vector<Json> stats_row(std::vector<Json> head, const SummaryStats& s) {
  for (double v : {s.mean, s.std, s.p50, s.p95, s.p99, s.min, s.max}) head.emplace_back(v);
  return head;
}

const std::vector<std::string> kStatColumns = {"mean_us", "std_us", "p50_us", "p95_us", "p99_us", "min_us", "max_us"};

std::vector<std::string> with_stats(std::vector<std::string> head) {
  head.insert(head.end(), kStatColumns.begin(), kStatColumns.end());
  return head;
}

// ------------------------------------------------------------ latency ----

struct LatencyOpts {
  std::size_t runs = 10000;
  double budget_us = link::kLatencyBudgetUs;
  bool no_jitter = false;
  std::vector<std::string> paths = {"host", "device"};
  double inference_us = 0.0;
  std::vector<int> depths;
  int width = 256;
  bool accel = false;
  std::size_t wallclock = 0;
  CLI::Option *runs_opt, *budget_opt, *jitter_opt, *path_opt, *inf_opt, *depth_opt, *width_opt,
      *accel_opt, *wall_opt;
};

void register_latency(CLI::App* sub, LatencyOpts& o) {
  o.runs_opt = sub->add_option("--runs", o.runs, "Simulated events per path");
  o.budget_opt = sub->add_option("--budget-us", o.budget_us, "End-to-end latency budget");
  o.jitter_opt = sub->add_flag("--no-jitter", o.no_jitter, "Collapse every stage onto its mean");
  o.path_opt = sub->add_option("--path", o.paths, "Paths to simulate")
                   ->delimiter(',')
                   ->check(CLI::IsMember({"host", "device", "legacy"}));
  o.inf_opt = sub->add_option("--inference-us", o.inference_us, "Inference stage cost");
  o.depth_opt = sub->add_option("--depths", o.depths, "MLP depths for the budget sweep")->delimiter(',');
  o.width_opt = sub->add_option("--width", o.width, "Width of the swept dense layers");
  o.accel_opt = sub->add_flag("--accel", o.accel, "Enable the fingertip accelerator in the sweep");
  o.wall_opt = sub->add_option("--wallclock", o.wallclock, "Also time N items through the threaded pipeline");
}

void merge_latency(const Settings& s, LatencyOpts& o) {
  s.merge(o.runs_opt, "runs", o.runs);
  s.merge(o.budget_opt, "budget_us", o.budget_us);
  s.merge(o.jitter_opt, "no_jitter", o.no_jitter);
  s.merge(o.path_opt, "path", o.paths);
  s.merge(o.inf_opt, "inference_us", o.inference_us);
  s.merge(o.depth_opt, "depths", o.depths);
  s.merge(o.width_opt, "width", o.width);
  s.merge(o.accel_opt, "accel", o.accel);
  s.merge(o.wall_opt, "wallclock", o.wallclock);
}

void add_latency(Report& r, const LatencyOpts& o, std::uint64_t seed) {
  if (o.runs == 0) throw Error(Errc::kConfigError, "--runs must be >= 1");
  r.config["latency"] = {{"runs", o.runs},           {"budget_us", o.budget_us},
                         {"no_jitter", o.no_jitter}, {"path", o.paths},
                         {"inference_us", o.inference_us}, {"depths", o.depths},
                         {"width", o.width},         {"accel", o.accel},
                         {"wallclock", o.wallclock}};
  Table& stages = r.table("latency_stages", with_stats({"path", "stage"}));
  Table& budget = r.table("latency_budget", {"path", "total_mean_us", "budget_us", "pass", "headroom_us"});
  for (const auto& name : o.paths) {
    link::PathProfile p = link::path_profile(name);
    if (o.no_jitter) p = p.without_jitter();
    link::Workload w;
    w.inference_us = o.inference_us;
    const auto st = link::run_pipeline(p, w, o.runs, seed);
    const std::pair<const char*, const SummaryStats*> rows[] = {
        {"transfer", &st.transfer},         {"subsample", &st.subsample}, {"inference", &st.inference},
        {"action_transfer", &st.action_transfer}, {"action", &st.action},  {"total", &st.total}};
    for (const auto& [stage, stats] : rows) stages.add(stats_row({name, stage}, *stats));
    const auto v = link::latency_budget_check(st.total.mean, o.budget_us);
    budget.add({name, v.total_us, v.budget_us, v.pass, v.headroom_us});
    r.summary["total_mean_us_" + name] = st.total.mean;
    r.summary["budget_pass_" + name] = v.pass;
  }
  if (!o.depths.empty()) {
    Table& sweep = r.table("depth_sweep", {"path", "accel", "depth", "inference_us", "total_mean_us", "within_budget"});
    for (const auto& name : o.paths) {
      link::PathProfile p = link::path_profile(name);
      if (o.no_jitter) p = p.without_jitter();
      const auto ds = link::mlp_depth_sweep(p, o.width, o.depths, o.accel, o.runs, seed, o.budget_us);
      for (const auto& row : ds.rows)
        sweep.add({name, o.accel, row.depth, row.inference_us, row.total_mean_us, row.within_budget});
      r.summary["first_depth_over_budget_" + name] = ds.first_exceeding ? Json(*ds.first_exceeding) : Json(nullptr);
    }
  }
  if (o.wallclock > 0) {
    link::WallclockConfig wc;
    wc.items = o.wallclock;
    wc.seed = seed;
    const auto rep = link::run_wallclock_pipeline(wc);
    Table& t = r.table("wallclock_measured", with_stats({"stage"}));
    t.add(stats_row({"subsample"}, rep.subsample_us));
    t.add(stats_row({"inference"}, rep.inference_us));
    t.add(stats_row({"end_to_end"}, rep.end_to_end_us));
    r.summary["wallclock_throughput_hz"] = rep.throughput_hz;
  }
}

// ------------------------------------------------------------- reflex ----

struct ReflexOpts {
  std::size_t runs = 1000;
  bool no_jitter = false;
  std::vector<std::string> paths = {"device", "host", "legacy"};
  double inference_us = 0.0;
  CLI::Option *runs_opt, *jitter_opt, *path_opt, *inf_opt;
};

void register_reflex(CLI::App* sub, ReflexOpts& o) {
  o.runs_opt = sub->add_option("--runs", o.runs, "Trials per path (>= 100)");
  o.jitter_opt = sub->add_flag("--no-jitter", o.no_jitter, "Collapse every stage onto its mean");
  o.path_opt = sub->add_option("--path", o.paths, "Reflex paths")
                   ->delimiter(',')
                   ->check(CLI::IsMember({"host", "device", "legacy"}));
  o.inf_opt = sub->add_option("--inference-us", o.inference_us, "Decision cost beyond the detector");
}

void merge_reflex(const Settings& s, ReflexOpts& o) {
  s.merge(o.runs_opt, "runs", o.runs);
  s.merge(o.jitter_opt, "no_jitter", o.no_jitter);
  s.merge(o.path_opt, "path", o.paths);
  s.merge(o.inf_opt, "inference_us", o.inference_us);
}

void add_reflex(Report& r, const ReflexOpts& o, std::uint64_t seed) {
  r.config["reflex"] = {{"runs", o.runs}, {"no_jitter", o.no_jitter}, {"path", o.paths},
                        {"inference_us", o.inference_us}};
  reflex::ReflexConfig cfg;
  cfg.jitter = !o.no_jitter;
  cfg.inference_us = o.inference_us;
  std::vector<reflex::ReflexBenchmark> results;
  Table& lat = r.table("reflex_latency", with_stats({"path", "trials", "commands"}));
  for (const auto& name : o.paths) {
    const auto b = reflex::reflex_benchmark(reflex::parse_reflex_path(name), o.runs, seed, cfg);
    lat.add(stats_row({name, b.trials.size(), b.commands}, b.latency));
    r.summary["reflex_mean_us_" + name] = b.latency.mean;
    results.push_back(b);
  }
  Table& dom = r.table("reflex_dominance", {"faster", "slower", "matched_trials", "fraction_faster"});
  for (std::size_t a = 0; a < results.size(); ++a) {
    for (std::size_t b = a + 1; b < results.size(); ++b) {
      std::size_t matched = 0, wins = 0;
      for (std::size_t i = 0; i < results[a].trials.size(); ++i) {
        const auto& ta = results[a].trials[i];
        const auto& tb = results[b].trials[i];
        if (!ta.command || !tb.command) continue;
        ++matched;
        wins += ta.latency_us < tb.latency_us;
      }
      const bool a_first = results[a].latency.mean <= results[b].latency.mean;
      const double frac = matched ? static_cast<double>(a_first ? wins : matched - wins) / matched : 0.0;
      dom.add({o.paths[a_first ? a : b], o.paths[a_first ? b : a], matched, frac});
    }
  }
}

// ------------------------------------------------------------- optics ----

struct OpticsOpts {
  std::string alpha_sweep = "1,5,10,15,20,25,lambertian";
  std::uint64_t photons = 1'000'000;
  double cnr_weight = optics::default_sweep_weights().cnr;
  double uniformity_weight = optics::default_sweep_weights().uniformity;
  double cnr_cap = optics::default_sweep_weights().cnr_cap;
  int threads = 1;
  CLI::Option *alpha_opt, *photons_opt, *cw_opt, *uw_opt, *cap_opt, *threads_opt;
};

void register_optics(CLI::App* sub, OpticsOpts& o) {
  o.alpha_opt = sub->add_option("--alpha-sweep", o.alpha_sweep,
                                "Scatter surfaces: HWHM angles in degrees, 'lambertian', 'specular'");
  o.photons_opt = sub->add_option("--photons", o.photons, "Photon budget per surface");
  o.cw_opt = sub->add_option("--cnr-weight", o.cnr_weight, "Objective weight of contrast");
  o.uw_opt = sub->add_option("--uniformity-weight", o.uniformity_weight, "Objective weight of non-uniformity");
  o.cap_opt = sub->add_option("--cnr-cap", o.cnr_cap, "CNR above which contrast stops adding value");
  o.threads_opt = sub->add_option("--threads", o.threads, "Render threads");
}

void merge_optics(const Settings& s, OpticsOpts& o) {
  s.merge(o.alpha_opt, "alpha_sweep", o.alpha_sweep);
  s.merge(o.photons_opt, "photons", o.photons);
  s.merge(o.cw_opt, "cnr_weight", o.cnr_weight);
  s.merge(o.uw_opt, "uniformity_weight", o.uniformity_weight);
  s.merge(o.cap_opt, "cnr_cap", o.cnr_cap);
  s.merge(o.threads_opt, "threads", o.threads);
}

std::vector<optics::ScatterSurface> parse_surfaces(const std::string& text) {
  std::vector<optics::ScatterSurface> out;
  for (const auto& tok : split(text)) {
    if (tok == "lambertian") {
      out.push_back(optics::ScatterSurface::lambertian());
    } else if (tok == "specular") {
      out.push_back(optics::ScatterSurface::specular());
    } else {
      std::size_t used = 0;
      double a = 0.0;
      try {
        a = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size()) throw Error(Errc::kConfigError, "bad --alpha-sweep entry '" + tok + "'");
      out.push_back(optics::ScatterSurface::gaussian(a));
    }
  }
  if (out.empty()) throw Error(Errc::kConfigError, "--alpha-sweep is empty");
  return out;
}

void add_optics(Report& r, const OpticsOpts& o, std::uint64_t seed) {
  r.config["optics"] = {{"alpha_sweep", o.alpha_sweep}, {"photons", o.photons},
                        {"cnr_weight", o.cnr_weight},   {"uniformity_weight", o.uniformity_weight},
                        {"cnr_cap", o.cnr_cap}};
  const auto surfaces = parse_surfaces(o.alpha_sweep);
  optics::SweepConfig cfg = optics::default_sweep_config();
  cfg.render.photons = o.photons;
  cfg.render.seed = seed;
  cfg.render.threads = std::max(1, o.threads);
  const optics::SweepWeights w{o.cnr_weight, o.uniformity_weight, o.cnr_cap};
  const auto res = optics::scatter_sweep(surfaces, w, cfg);
  Table& t = r.table("scatter_sweep", {"surface", "std_over_mean", "range_over_mean", "cnr_mean", "objective", "in_band"});
  for (std::size_t i = 0; i < res.points.size(); ++i) {
    const auto& p = res.points[i];
    const bool in_band = std::find(res.band.begin(), res.band.end(), i) != res.band.end();
    t.add({p.surface.label(), p.uniformity.std_over_mean, p.uniformity.range_over_mean, p.cnr_mean,
           p.objective, in_band});
  }
  r.summary["best_surface"] = res.points[res.best].surface.label();
  r.summary["band_lo_deg"] = std::isnan(res.band_lo_deg) ? Json(nullptr) : Json(res.band_lo_deg);
  r.summary["band_hi_deg"] = std::isnan(res.band_hi_deg) ? Json(nullptr) : Json(res.band_hi_deg);
}

// ---------------------------------------------------------------- mtf ----

struct MtfOpts {
  std::vector<double> spacings = {4, 5, 6, 7, 8, 10, 15, 20, 25, 30};
  CLI::Option* spacing_opt;
};

void register_mtf(CLI::App* sub, MtfOpts& o) {
  o.spacing_opt = sub->add_option("--spacings", o.spacings, "Prong spacings in um")->delimiter(',');
}

void add_mtf(Report& r, const MtfOpts& o) {
  r.config["mtf"] = {{"spacings", o.spacings}};
  Table& t = r.table("mtf", {"region", "psf_sigma_um", "spacing_um", "mtf", "resolvable"});
  for (const auto& region : optics::default_region_resolution()) {
    for (double s : o.spacings) {
      if (!(s > 0.0)) throw Error(Errc::kConfigError, "spacings must be positive");
      const auto prof = optics::two_prong_profile(s, region.psf_sigma_um);
      const auto m = optics::mtf_resolvable(prof, s, region.psf_sigma_um);
      t.add({region.region, region.psf_sigma_um, s, m.mtf, m.resolvable});
    }
    r.summary["limit_um_region" + std::to_string(region.region)] = region.limit_um;
  }
}

// ---------------------------------------------------------------- gas ----

struct GasOpts {
  std::vector<double> integration = {3, 6, 15, 30, 60, 90};
  int runs = 30;
  double approach_s = 90.0;
  int repeats = 1;
  int epochs = 300;
  CLI::Option *int_opt, *runs_opt, *approach_opt, *rep_opt, *epochs_opt;
};

void register_gas(CLI::App* sub, GasOpts& o) {
  o.int_opt = sub->add_option("--integration", o.integration, "Integration times in seconds")->delimiter(',');
  o.runs_opt = sub->add_option("--runs", o.runs, "Approaches per material");
  o.approach_opt = sub->add_option("--approach-s", o.approach_s, "Recorded length of each approach");
  o.rep_opt = sub->add_option("--repeats", o.repeats, "Independent seeds (seed, seed+1, ...)");
  o.epochs_opt = sub->add_option("--epochs", o.epochs, "Training epochs");
}

void merge_gas(const Settings& s, GasOpts& o) {
  s.merge(o.int_opt, "integration", o.integration);
  s.merge(o.runs_opt, "runs", o.runs);
  s.merge(o.approach_opt, "approach_s", o.approach_s);
  s.merge(o.rep_opt, "repeats", o.repeats);
  s.merge(o.epochs_opt, "epochs", o.epochs);
}

void add_gas(Report& r, const GasOpts& o, std::uint64_t seed) {
  if (o.runs < 2 || o.repeats < 1) throw Error(Errc::kConfigError, "--runs must be >= 2 and --repeats >= 1");
  r.config["gas"] = {{"integration", o.integration}, {"runs", o.runs},     {"approach_s", o.approach_s},
                     {"repeats", o.repeats},         {"epochs", o.epochs}};
  Table& per = r.table("gas_runs", {"seed", "integration_s", "accuracy", "train", "test"});
  Table& agg = r.table("gas_accuracy", {"integration_s", "mean_accuracy", "std_accuracy", "min", "max"});
  std::map<double, std::vector<double>> acc;
  for (int k = 0; k < o.repeats; ++k) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(k);
    const auto runs = nn::make_gas_runs(synth::kGasMaterials, o.runs, o.approach_s, s);
    for (double t : o.integration) {
      nn::GasExperimentConfig cfg;
      cfg.seed = s;
      cfg.epochs = o.epochs;
      const auto g = nn::gas_experiment(runs, t, cfg);
      per.add({s, t, g.accuracy, g.train_size, g.test_size});
      acc[t].push_back(g.accuracy);
    }
  }
  for (const auto& [t, v] : acc) {
    const auto st = summarize(v);
    agg.add({t, st.mean, st.std, st.min, st.max});
  }
}

// ------------------------------------------------------------- fusion ----

struct FusionOpts {
  std::vector<std::string> modalities = {"all"};
  std::string finger_mode = "both";
  int trials = 50;
  int epochs = 200;
  bool shuffle = false;
  bool ablation = false;
  CLI::Option *mod_opt, *mode_opt, *trials_opt, *epochs_opt, *shuffle_opt, *ablation_opt;
};

void register_fusion(CLI::App* sub, FusionOpts& o) {
  o.mod_opt = sub->add_option("--modalities", o.modalities,
                              "Modality set per experiment, e.g. 'all' or 'audio+pressure'; repeatable");
  o.mode_opt = sub->add_option("--finger-mode", o.finger_mode, "Finger handling")
                   ->check(CLI::IsMember({"dependent", "independent", "both"}));
  o.trials_opt = sub->add_option("--trials", o.trials, "Trials per action x material combination");
  o.epochs_opt = sub->add_option("--epochs", o.epochs, "Maximum training epochs");
  o.shuffle_opt = sub->add_flag("--shuffle-labels", o.shuffle, "Permute labels across trials (control)");
  o.ablation_opt = sub->add_flag("--ablation", o.ablation, "Run all modalities, each single one and a shuffled control");
}

void merge_fusion(const Settings& s, FusionOpts& o) {
  s.merge(o.mod_opt, "modalities", o.modalities);
  s.merge(o.mode_opt, "finger_mode", o.finger_mode);
  s.merge(o.trials_opt, "trials", o.trials);
  s.merge(o.epochs_opt, "epochs", o.epochs);
  s.merge(o.shuffle_opt, "shuffle_labels", o.shuffle);
  s.merge(o.ablation_opt, "ablation", o.ablation);
}

std::vector<ModalityKind> parse_modality_set(const std::string& text) {
  if (text == "all") return {nn::kWindowModalities.begin(), nn::kWindowModalities.end()};
  std::vector<ModalityKind> out;
  for (const auto& tok : split(text, ",+")) {
    const auto m = parse_modality(tok);
    if (!m) throw Error(Errc::kConfigError, "unknown modality '" + tok + "'");
    out.push_back(*m);
  }
  if (out.empty()) throw Error(Errc::kConfigError, "empty modality set");
  return out;
}

void add_fusion(Report& r, const FusionOpts& o, std::uint64_t seed) {
  if (o.trials < 2) throw Error(Errc::kConfigError, "--trials must be >= 2");
  struct Job {
    std::string label;
    std::vector<ModalityKind> mods;
    bool shuffle;
  };
  std::vector<Job> jobs;
  if (o.ablation) {
    jobs.push_back({"all", parse_modality_set("all"), false});
    for (ModalityKind m : nn::kWindowModalities) jobs.push_back({std::string(modality_name(m)), {m}, false});
    jobs.push_back({"all", parse_modality_set("all"), true});
  } else {
    for (const auto& m : o.modalities) jobs.push_back({m, parse_modality_set(m), o.shuffle});
  }
  std::vector<std::pair<std::string, nn::FingerMode>> modes;
  if (o.finger_mode != "independent") modes.emplace_back("dependent", nn::FingerMode::kDependent);
  if (o.finger_mode != "dependent") modes.emplace_back("independent", nn::FingerMode::kIndependent);

  r.config["fusion"] = {{"modalities", o.modalities}, {"finger_mode", o.finger_mode}, {"trials", o.trials},
                        {"epochs", o.epochs},         {"shuffle_labels", o.shuffle},  {"ablation", o.ablation}};
  nn::FusionDatasetConfig dc;
  dc.trials_per_combo = o.trials;
  dc.seed = seed;
  const auto data = nn::make_fusion_dataset(dc);
  r.summary["windows"] = data.windows.size();

  Table& t = r.table("fusion", {"modalities", "finger_mode", "shuffled", "action_accuracy", "material_accuracy",
                                "chosen_lr", "train", "test"});
  Table& conf = r.table("fusion_confusion", {"modalities", "finger_mode", "shuffled", "head", "truth", "predicted", "count"});
  for (const auto& job : jobs) {
    for (const auto& [mode_name, mode] : modes) {
      nn::FusionConfig fc;
      fc.max_epochs = o.epochs;
      fc.shuffle_labels = job.shuffle;
      fc.seed = seed;
      const auto res = nn::fusion_experiment(data, mode, job.mods, fc);
      t.add({job.label, mode_name, job.shuffle, res.action_accuracy, res.material_accuracy, res.chosen_lr,
             res.train_size, res.test_size});
      for (int head = 0; head < 2; ++head) {
        const auto& c = head == 0 ? res.action_confusion : res.material_confusion;
        for (std::size_t a = 0; a < 3; ++a) {
          for (std::size_t b = 0; b < 3; ++b) {
            const auto name = [&](std::size_t i) {
              return std::string(head == 0 ? action_name(static_cast<Action>(i))
                                           : material_name(static_cast<Material>(i)));
            };
            conf.add({job.label, mode_name, job.shuffle, head == 0 ? "action" : "material", name(a), name(b),
                      c[a][b]});
          }
        }
      }
    }
  }
}

// ------------------------------------------------------------ liquid ----

struct LiquidOpts {
  std::vector<std::string> logs;
  int finger = -1;
};

void add_liquid(Report& r, const LiquidOpts& o) {
  r.config["liquid"] = {{"logs", o.logs}, {"finger", o.finger}};
  LiquidOptions lo;
  if (o.finger >= 0) lo.finger = static_cast<unsigned>(o.finger);
  Table& taps = r.table("taps", {"log", "finger", "onset_s", "peak_hz", "bin_hz", "tau_s", "fill"});
  Table& logs = r.table("fill_prediction", {"log", "taps", "predicted", "votes_empty", "votes_half", "votes_full"});
  for (const auto& path : o.logs) {
    const auto log = read_log(path);
    const auto a = analyze_liquid(log, lo);
    for (const auto& tp : a.taps) {
      taps.add({path, tp.finger, tp.onset_s, tp.peak_hz, tp.bin_hz,
                tp.tau_s, fill_level_name(tp.level)});
    }
    logs.add({path, a.taps.size(), fill_level_name(a.predicted), a.votes[0], a.votes[1], a.votes[2]});
  }
}

// ------------------------------------------------------- record/replay ----

struct RecordOpts {
  std::string scenario;
};

int run_record(const RecordOpts& o, const Common& c, std::ostream& out) {
  synth::ScenarioScript script = synth::load_scenario(o.scenario);
  if (c.seed_given()) script.seed = c.seed;
  const std::string path = output_path(c, fs::path(o.scenario).stem().string() + ".d36r");
  if (path.empty()) throw Error(Errc::kConfigError, "record needs --out or $" + std::string(kOutDirEnv));
  const RecordLog log = synth::run_scenario(script);
  const std::size_t bytes = write_log(log, path);

  Report r;
  r.command = "record";
  r.seed = script.seed;
  r.config = {{"scenario", o.scenario}, {"seed", script.seed}};
  r.summary = {{"log", path}, {"streams", log.streams.size()}, {"chunks", log.samples.size()}, {"bytes", bytes}};
  if (!c.quiet) out << r.render(parse_format(c.format));
  return kExitOk;
}

struct ReplayOpts {
  std::string log;
};

int run_replay(const ReplayOpts& o, const Common& c, std::ostream& out) {
  const auto bytes = read_bytes(o.log);
  const RecordLog log = decode_log(bytes);
  const auto again = encode_log(log);
  if (!c.out.empty()) {
    std::ofstream os(c.out, std::ios::binary);
    if (!os) throw Error(Errc::kIoError, "cannot open " + c.out + " for writing");
    os.write(reinterpret_cast<const char*>(again.data()), static_cast<std::streamsize>(again.size()));
    if (!os) throw Error(Errc::kIoError, "write failed for " + c.out);
  }

  Report r;
  r.command = "replay";
  r.seed = c.seed;
  r.config = {{"log", o.log}};
  r.summary = {{"chunks", log.samples.size()},
               {"streams", log.streams.size()},
               {"bytes", bytes.size()},
               {"byte_identical", again == bytes}};
  Table& t = r.table("streams", {"stream_id", "finger", "modality", "rate_hz", "channels", "chunks", "first_s", "last_s"});
  for (const auto& d : log.streams) {
    std::size_t n = 0;
    double first = 0.0, last = 0.0;
    for (const auto& s : log.samples) {
      if (s.stream_id != d.stream_id) continue;
      if (n++ == 0) first = s.t.seconds();
      last = s.t.seconds();
    }
    t.add({d.stream_id, finger_of(d.stream_id), modality_name(d.kind), d.rate_hz, d.channels, n, first, last});
  }
  if (!c.quiet) out << r.render(parse_format(c.format));
  return again == bytes ? kExitOk : kExitFailure;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multimodal fingertip simulator and benchmark harness", "tactile-bench"};
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);

  Common common;
  std::map<std::string, std::function<int()>> handlers;

  RecordOpts rec;
  auto* s_rec = app.add_subcommand("record", "Synthesize a scenario file into a binary log");
  s_rec->add_option("scenario", rec.scenario, "Scenario YAML")->required();
  add_common(s_rec, common);

  ReplayOpts rep;
  auto* s_rep = app.add_subcommand("replay", "Decode a log, re-encode it and summarize its streams");
  s_rep->add_option("log", rep.log, "Binary log")->required();
  add_common(s_rep, common);

  LatencyOpts lat;
  auto* s_lat = app.add_subcommand("bench-latency", "Stage timing of the processing paths");
  register_latency(s_lat, lat);
  add_common(s_lat, common);

  ReflexOpts rfx;
  auto* s_rfx = app.add_subcommand("bench-reflex", "Event-to-action latency of the reflex arc");
  register_reflex(s_rfx, rfx);
  add_common(s_rfx, common);

  OpticsOpts opt;
  auto* s_opt = app.add_subcommand("bench-optics", "Illumination sweep over surface scatter");
  register_optics(s_opt, opt);
  add_common(s_opt, common);

  MtfOpts mtf;
  auto* s_mtf = app.add_subcommand("bench-mtf", "Two-prong spatial resolution per region");
  register_mtf(s_mtf, mtf);
  add_common(s_mtf, common);

  GasOpts gas;
  auto* s_gas = app.add_subcommand("train-gas", "Odour classification accuracy vs integration time");
  register_gas(s_gas, gas);
  add_common(s_gas, common);

  FusionOpts fus;
  auto* s_fus = app.add_subcommand("train-fusion", "Action and material classification from fused windows");
  register_fusion(s_fus, fus);
  add_common(s_fus, common);

  LiquidOpts liq;
  auto* s_liq = app.add_subcommand("analyze-liquid", "Fill level from container tap ring-downs");
  s_liq->add_option("logs", liq.logs, "Binary logs")->required();
  s_liq->add_option("--finger", liq.finger, "Finger whose audio is analysed (default: first)");
  add_common(s_liq, common);

  LatencyOpts rpt_lat;
  ReflexOpts rpt_rfx;
  MtfOpts rpt_mtf;
  auto* s_rpt = app.add_subcommand("report", "Latency, reflex and resolution summary in one report");
  s_rpt->add_option("--runs", rpt_lat.runs, "Simulated events per latency path");
  s_rpt->add_option("--reflex-runs", rpt_rfx.runs, "Trials per reflex path");
  add_common(s_rpt, common);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  auto finish = [&](Report& r) {
    r.seed = common.seed;
    emit(r, common, out);
    return kExitOk;
  };

  try {
    Settings settings;
    settings.load(common.config_path);
    settings.merge(common.seed_given(), "seed", common.seed);
    settings.merge(common.format_given(), "format", common.format);
    parse_format(common.format);

    Report r;
    if (s_rec->parsed()) return run_record(rec, common, out);
    if (s_rep->parsed()) return run_replay(rep, common, out);
    if (s_lat->parsed()) {
      merge_latency(settings, lat);
      r.command = "bench-latency";
      add_latency(r, lat, common.seed);
    } else if (s_rfx->parsed()) {
      merge_reflex(settings, rfx);
      r.command = "bench-reflex";
      add_reflex(r, rfx, common.seed);
    } else if (s_opt->parsed()) {
      merge_optics(settings, opt);
      r.command = "bench-optics";
      add_optics(r, opt, common.seed);
    } else if (s_mtf->parsed()) {
      settings.merge(mtf.spacing_opt, "spacings", mtf.spacings);
      r.command = "bench-mtf";
      add_mtf(r, mtf);
    } else if (s_gas->parsed()) {
      merge_gas(settings, gas);
      r.command = "train-gas";
      add_gas(r, gas, common.seed);
    } else if (s_fus->parsed()) {
      merge_fusion(settings, fus);
      r.command = "train-fusion";
      add_fusion(r, fus, common.seed);
    } else if (s_liq->parsed()) {
      r.command = "analyze-liquid";
      add_liquid(r, liq);
    } else if (s_rpt->parsed()) {
      r.command = "report";
      add_latency(r, rpt_lat, common.seed);
      add_reflex(r, rpt_rfx, common.seed);
      add_mtf(r, rpt_mtf);
    }
    return finish(r);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace tactile::cli
