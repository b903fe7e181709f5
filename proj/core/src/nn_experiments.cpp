#include <algorithm>
#include <cmath>
#include <numeric>

#include "tactile/error.hpp"
#include "tactile/experiments.hpp"
#include "tactile/rng.hpp"
#include "tactile/windowing.hpp"

namespace tactile::nn {

namespace {

struct Standardizer {
  Vector mean, scale;

  static Standardizer fit(const Matrix& x) {
    Standardizer s;
    s.mean = x.rowwise().mean();
    const Matrix centered = x.colwise() - s.mean;
    s.scale = (centered.array().square().rowwise().sum() / static_cast<double>(x.cols())).sqrt();
    for (Eigen::Index i = 0; i < s.scale.size(); ++i) {
      if (!(s.scale(i) > 1e-12)) s.scale(i) = 1.0;
    }
    return s;
  }
  Matrix apply(const Matrix& x) const {
    return (x.colwise() - mean).array().colwise() / scale.array();
  }
};

Matrix gather_columns(const Matrix& x, std::span<const std::size_t> idx) {
  Matrix out(x.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i)
    out.col(static_cast<Eigen::Index>(i)) = x.col(static_cast<Eigen::Index>(idx[i]));
  return out;
}

}  // namespace

// ---------------------------------------------------------------- gas ------

std::vector<GasRun> make_gas_runs(std::span<const synth::ObjectMaterial> materials,
                                  int runs_per_material, double approach_s, std::uint64_t seed,
                                  const synth::GasModel& model) {
  if (runs_per_material < 1) throw Error(Errc::kInvalidArgument, "need at least one run per material");
  std::vector<GasRun> runs;
  for (std::size_t m = 0; m < materials.size(); ++m) {
    synth::ObjectSpec obj = synth::ObjectSpec::solid(materials[m]);
    obj.gas = synth::default_gas_signature(materials[m], model);
    for (int r = 0; r < runs_per_material; ++r) {
      Rng rng = make_rng(seed, m * 1000 + static_cast<std::uint64_t>(r));
      runs.push_back({materials[m], static_cast<int>(m),
                      synth::gen_gas_approach(obj, approach_s, rng, model)});
    }
  }
  return runs;
}

GasResult gas_experiment(std::span<const GasRun> runs, double integration_s,
                         const GasExperimentConfig& config) {
  if (runs.empty()) throw Error(Errc::kEmptyDataset, "no gas runs");
  if (!(integration_s > 0.0)) throw Error(Errc::kInvalidArgument, "integration time must be positive");
  const auto n_read = static_cast<std::size_t>(std::floor(integration_s * config.rate_hz + 1e-9));
  if (n_read == 0) throw Error(Errc::kInvalidArgument, "integration window holds no reading");

  int classes = 0;
  for (const auto& r : runs) {
    if (r.label < 0) throw Error(Errc::kLabelOutOfRange, "negative gas label");
    if (r.readings.size() < n_read)
      throw Error(Errc::kInvalidArgument, "integration time exceeds the approach duration");
    classes = std::max(classes, r.label + 1);
  }

  Matrix x(4, static_cast<Eigen::Index>(runs.size()));
  std::vector<int> labels;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    Vector acc = Vector::Zero(4);
    for (std::size_t k = 0; k < n_read; ++k) {
      const auto v = synth::gas_vector(runs[i].readings[k]);
      for (int c = 0; c < 4; ++c) acc(c) += v[static_cast<std::size_t>(c)];
    }
    x.col(static_cast<Eigen::Index>(i)) = acc / static_cast<double>(n_read);
    labels.push_back(runs[i].label);
  }

  // Stratified split: each class contributes the same fraction to training.
  Rng rng = make_rng(config.seed, 0x6A5);
  std::vector<std::size_t> train_idx, test_idx;
  for (int c = 0; c < classes; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == c) members.push_back(i);
    }
    std::shuffle(members.begin(), members.end(), rng);
    const auto n_train = static_cast<std::size_t>(
        std::lround(config.train_fraction * static_cast<double>(members.size())));
    const std::size_t cut = members.size() > 1 ? std::clamp<std::size_t>(n_train, 1, members.size() - 1)
                                               : members.size();
    train_idx.insert(train_idx.end(), members.begin(), members.begin() + static_cast<long>(cut));
    test_idx.insert(test_idx.end(), members.begin() + static_cast<long>(cut), members.end());
  }
  GasResult result;
  result.classes = classes;
  result.train_size = train_idx.size();
  result.test_size = test_idx.size();
  if (classes == 1) {
    result.accuracy = 1.0;
    return result;
  }
  if (test_idx.empty()) throw Error(Errc::kEmptyDataset, "too few runs for a test split");

  const Matrix x_train_raw = gather_columns(x, train_idx);
  const Standardizer norm = Standardizer::fit(x_train_raw);
  Dataset train_set{norm.apply(x_train_raw), {}, {}};
  for (auto i : train_idx) train_set.labels.push_back(labels[i]);
  Dataset test_set{norm.apply(gather_columns(x, test_idx)), {}, {}};
  for (auto i : test_idx) test_set.labels.push_back(labels[i]);

  TrainConfig tc;
  tc.lr = config.lr;
  tc.max_epochs = config.epochs;
  tc.seed = config.seed;
  const MlpSpec spec{{4, config.hidden, classes}, Activation::kReLU, OutputHead::kSoftmax};
  const TrainResult trained = train(train_set, spec, tc);
  result.accuracy = accuracy(trained.model, test_set);
  return result;
}

// ------------------------------------------------------------- fusion ------

int window_modality_index(ModalityKind kind) {
  for (std::size_t i = 0; i < kWindowModalities.size(); ++i) {
    if (kWindowModalities[i] == kind) return static_cast<int>(i);
  }
  return -1;
}

namespace {

constexpr std::size_t kT = WindowSample::kFrames;

double lag_autocorr(std::span<const double> x, std::size_t lag) {
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    den += (x[i] - m) * (x[i] - m);
    if (i + lag < x.size()) num += (x[i] - m) * (x[i + lag] - m);
  }
  return den > 1e-18 ? num / den : 0.0;
}

double mean_of(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double std_of(std::span<const double> x) {
  const double m = mean_of(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(x.size()));
}

Vector encode_visuo(const WindowSample& w, const std::vector<double>* reference) {
  constexpr int side = static_cast<int>(WindowSample::kImageSide);
  constexpr int grid = 6, cell = side / grid;
  constexpr std::size_t frame_px = side * side * 3;
  std::vector<double> ref(side * side, 0.0);
  if (reference && reference->size() == frame_px) {
    for (int p = 0; p < side * side; ++p) {
      ref[static_cast<std::size_t>(p)] =
          ((*reference)[p * 3] + (*reference)[p * 3 + 1] + (*reference)[p * 3 + 2]) / 3.0;
    }
  } else {
    // Without a reference, the brightest value each pixel takes in the window.
    for (int p = 0; p < side * side; ++p) {
      double hi = 0.0;
      for (std::size_t t = 0; t < kT; ++t) {
        const auto* px = &w.visuotactile[t * frame_px + static_cast<std::size_t>(p) * 3];
        hi = std::max(hi, (px[0] + px[1] + px[2]) / 3.0);
      }
      ref[static_cast<std::size_t>(p)] = hi;
    }
  }

  std::array<std::vector<double>, 4> blob;  // core area, rim area, min, max per frame
  std::vector<std::vector<double>> cells(grid * grid);
  for (std::size_t t = 0; t < kT; ++t) {
    double core = 0, rim = 0, lo = 0, hi = 0;
    std::vector<double> cell_sum(grid * grid, 0.0);
    for (int y = 0; y < side; ++y) {
      for (int x = 0; x < side; ++x) {
        const std::size_t p = static_cast<std::size_t>(y) * side + x;
        const auto* px = &w.visuotactile[t * frame_px + p * 3];
        const double d = (px[0] + px[1] + px[2]) / 3.0 - ref[p];
        core += d < -6.0;
        rim += d > 4.0;
        lo = std::min(lo, d);
        hi = std::max(hi, d);
        cell_sum[(y / cell) * grid + x / cell] += d;
      }
    }
    blob[0].push_back(std::sqrt(core));
    blob[1].push_back(std::sqrt(rim));
    blob[2].push_back(lo);
    blob[3].push_back(hi);
    for (std::size_t c = 0; c < cells.size(); ++c) cells[c].push_back(cell_sum[c] / (cell * cell));
  }
  Vector f(8 + grid * grid);
  int k = 0;
  for (const auto& b : blob) {
    f(k++) = mean_of(b);
    f(k++) = std_of(b);
  }
  for (const auto& c : cells) f(k++) = std_of(c);
  return f;
}

Vector encode_audio(const WindowSample& w) {
  constexpr std::size_t bands = WindowSample::kMelBands, groups = 16;
  Vector f = Vector::Zero(groups + kT);
  for (std::size_t r = 0; r < WindowSample::kAudioRows; ++r) {
    for (std::size_t b = 0; b < bands; ++b) {
      const double v = w.audio[r * bands + b];
      f(static_cast<Eigen::Index>(b / (bands / groups))) += v;
      f(static_cast<Eigen::Index>(groups + r / WindowSample::kAudioChannels)) += v;
    }
  }
  f.head(groups) /= static_cast<double>(WindowSample::kAudioRows * (bands / groups));
  f.tail(kT) /= static_cast<double>(WindowSample::kAudioChannels * bands);
  return f;
}

Vector encode_pressure(const WindowSample& w) {
  constexpr std::size_t ch = WindowSample::kPressureChannels;
  Vector f(static_cast<Eigen::Index>(ch * 4));
  for (std::size_t c = 0; c < ch; ++c) {
    std::vector<double> x(kT);
    for (std::size_t t = 0; t < kT; ++t) x[t] = w.pressure[t * ch + c];
    const double s = std_of(x);
    double peak = 0.0;
    for (double v : x) peak = std::max(peak, std::abs(v));
    const auto base = static_cast<Eigen::Index>(c * 4);
    f(base) = std::log(s + 1e-6);
    f(base + 1) = lag_autocorr(x, 1);
    f(base + 2) = lag_autocorr(x, 2);
    f(base + 3) = s > 1e-9 ? peak / s : 0.0;
  }
  return f;
}

Vector encode_inertial(const WindowSample& w) {
  constexpr std::size_t axes = WindowSample::kInertialAxes;
  Vector f(static_cast<Eigen::Index>(axes * 4));
  for (std::size_t a = 0; a < axes; ++a) {
    std::vector<double> x(kT);
    for (std::size_t t = 0; t < kT; ++t) x[t] = w.inertial[t * axes + a];
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    const auto base = static_cast<Eigen::Index>(a * 4);
    f(base) = mean_of(x);
    f(base + 1) = std_of(x);
    f(base + 2) = lag_autocorr(x, 1);
    f(base + 3) = *hi - *lo;
  }
  return f;
}

}  // namespace

std::array<Vector, 4> encode_window(const WindowSample& window, const std::vector<double>* reference) {
  if (!window.shape_ok()) throw Error(Errc::kShapeMismatch, "window violates the shape contract");
  return {encode_visuo(window, reference), encode_audio(window), encode_pressure(window),
          encode_inertial(window)};
}

FusionDataset encode_windows(std::span<const WindowSample> windows,
                             std::span<const std::uint32_t> groups,
                             const std::vector<double>* reference) {
  if (groups.size() != windows.size())
    throw Error(Errc::kShapeMismatch, "one group id per window required");
  FusionDataset out;
  std::vector<std::uint32_t> seen;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto& w = windows[i];
    if (!w.action || !w.material) continue;
    out.windows.push_back({groups[i], w.finger_id, static_cast<int>(*w.action),
                           static_cast<int>(*w.material), encode_window(w, reference)});
    seen.push_back(groups[i]);
  }
  std::sort(seen.begin(), seen.end());
  out.groups = static_cast<std::size_t>(std::unique(seen.begin(), seen.end()) - seen.begin());
  return out;
}

FusionDataset make_fusion_dataset(const FusionDatasetConfig& config) {
  if (config.trials_per_combo < 1) throw Error(Errc::kInvalidArgument, "need at least one trial");
  constexpr std::array<synth::EventKind, 3> kinds = {synth::EventKind::kSlide, synth::EventKind::kTap,
                                                     synth::EventKind::kStir};
  constexpr std::array<synth::ObjectMaterial, 3> materials = {
      synth::ObjectMaterial::kWood, synth::ObjectMaterial::kPlastic, synth::ObjectMaterial::kSilicone};

  synth::ScenarioScript base;
  base.duration_s = config.trial_s;
  base.fingers = 4;
  base.modalities.assign(kWindowModalities.begin(), kWindowModalities.end());
  base.visuotactile_rate_hz = config.visuotactile_rate_hz;
  const auto& bg = synth::visuo_background(base.visuo);
  const std::vector<double> reference = bg.data;

  FusionDataset out;
  std::uint32_t group = 0;
  const dsp::WindowOptions wopt{config.trial_s, config.window_offset_s};
  for (int trial = 0; trial < config.trials_per_combo; ++trial) {
    for (auto kind : kinds) {
      for (auto material : materials) {
        synth::ScenarioScript s = base;
        s.seed = derive_seed(config.seed, group);
        synth::ScenarioEvent ev;
        ev.t_start_s = 0.0;
        ev.t_end_s = config.trial_s;
        ev.kind = kind;
        ev.object = synth::ObjectSpec::solid(material);
        ev.fingers = {0, 1, 2, 3};
        s.events = {ev};
        const RecordLog log = synth::run_scenario(s);
        dsp::for_each_window(log, wopt, synth::make_labeler(s), [&](WindowSample&& w) {
          if (!w.action || !w.material) return;
          out.windows.push_back({group, w.finger_id, static_cast<int>(*w.action),
                                 static_cast<int>(*w.material), encode_window(w, &reference)});
        });
        ++group;
      }
    }
  }
  out.groups = group;
  return out;
}

namespace {

// Shared trunk (two ReLU layers) feeding two softmax heads.
struct FusionNet {
  MlpModel trunk;  // linear head; ReLU applied on its output
  MlpModel action_head;
  MlpModel material_head;

  FusionNet(int in, const FusionConfig& c, std::uint64_t seed)
      : trunk(MlpModel::random({{in, c.trunk_width, c.trunk_width}, Activation::kReLU, OutputHead::kLinear},
                               derive_seed(seed, 1))),
        action_head(MlpModel::random({{c.trunk_width, c.head_width, 3}}, derive_seed(seed, 2))),
        material_head(MlpModel::random({{c.trunk_width, c.head_width, 3}}, derive_seed(seed, 3))) {}

  std::pair<std::vector<int>, std::vector<int>> predict(const Matrix& x) const {
    const Matrix h = trunk.logits(x).cwiseMax(0.0);
    return {nn::predict(action_head, h), nn::predict(material_head, h)};
  }
};

struct Split {
  std::vector<std::size_t> train, val, test;  // sample indices
};

struct Samples {
  Matrix x;
  std::vector<int> action, material;
  std::vector<std::uint32_t> group;
};

Samples assemble(const FusionDataset& data, FingerMode mode, std::span<const int> mods) {
  Samples s;
  auto feature_len = [&](const EncodedWindow& w) {
    Eigen::Index n = 0;
    for (int m : mods) n += w.features[static_cast<std::size_t>(m)].size();
    return n;
  };
  auto write = [&](const EncodedWindow& w, Eigen::Index col, Eigen::Index row) {
    for (int m : mods) {
      const Vector& f = w.features[static_cast<std::size_t>(m)];
      s.x.block(row, col, f.size(), 1) = f;
      row += f.size();
    }
    return row;
  };
  if (data.windows.empty()) return s;
  const Eigen::Index per = feature_len(data.windows.front());

  if (mode == FingerMode::kIndependent) {
    s.x.resize(per, static_cast<Eigen::Index>(data.windows.size()));
    for (std::size_t i = 0; i < data.windows.size(); ++i) {
      const auto& w = data.windows[i];
      write(w, static_cast<Eigen::Index>(i), 0);
      s.action.push_back(w.action);
      s.material.push_back(w.material);
      s.group.push_back(w.group);
    }
    return s;
  }

  // Dependent: one sample per group with the four fingers side by side.
  std::vector<std::array<const EncodedWindow*, 4>> by_group;
  std::vector<std::uint32_t> ids;
  for (const auto& w : data.windows) {
    auto it = std::find(ids.begin(), ids.end(), w.group);
    if (it == ids.end()) {
      ids.push_back(w.group);
      by_group.push_back({});
      it = ids.end() - 1;
    }
    if (w.finger < 4) by_group[static_cast<std::size_t>(it - ids.begin())][w.finger] = &w;
  }
  std::vector<std::size_t> complete;
  for (std::size_t g = 0; g < by_group.size(); ++g) {
    if (std::all_of(by_group[g].begin(), by_group[g].end(), [](auto* p) { return p != nullptr; }))
      complete.push_back(g);
  }
  s.x.resize(per * 4, static_cast<Eigen::Index>(complete.size()));
  for (std::size_t i = 0; i < complete.size(); ++i) {
    const auto& fingers = by_group[complete[i]];
    Eigen::Index row = 0;
    for (const auto* w : fingers) row = write(*w, static_cast<Eigen::Index>(i), row);
    s.action.push_back(fingers[0]->action);
    s.material.push_back(fingers[0]->material);
    s.group.push_back(fingers[0]->group);
  }
  return s;
}

Split split_by_group(const Samples& s, const FusionConfig& c) {
  std::vector<std::uint32_t> groups = s.group;
  std::sort(groups.begin(), groups.end());
  groups.erase(std::unique(groups.begin(), groups.end()), groups.end());
  Rng rng = make_rng(c.seed, 0x5B17);
  std::shuffle(groups.begin(), groups.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::lround(c.train_fraction * static_cast<double>(groups.size())));
  const auto n_val = static_cast<std::size_t>(std::lround(c.validation_fraction * static_cast<double>(n_train)));
  std::vector<int> role(groups.empty() ? 0 : *std::max_element(groups.begin(), groups.end()) + 1, 2);
  for (std::size_t i = 0; i < groups.size(); ++i) role[groups[i]] = i < n_val ? 1 : (i < n_train ? 0 : 2);
  Split sp;
  for (std::size_t i = 0; i < s.group.size(); ++i) {
    switch (role[s.group[i]]) {
      case 0: sp.train.push_back(i); break;
      case 1: sp.val.push_back(i); break;
      default: sp.test.push_back(i); break;
    }
  }
  return sp;
}

double hit_rate(std::span<const int> pred, std::span<const int> truth) {
  std::size_t hit = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == truth[i];
  return pred.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(pred.size());
}

std::vector<int> pick(std::span<const int> v, std::span<const std::size_t> idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(v[i]);
  return out;
}

struct Fitted {
  FusionNet net;
  double val_score;
};

Fitted fit(const Matrix& x, std::span<const int> ya, std::span<const int> ym, const Matrix& xv,
           std::span<const int> va, std::span<const int> vm, double lr, const FusionConfig& c) {
  FusionNet net(static_cast<int>(x.rows()), c, c.seed);
  const AdamConfig ac{lr, 0.9, 0.999, 1e-8};
  Adam opt_t(net.trunk, ac), opt_a(net.action_head, ac), opt_m(net.material_head, ac);
  Rng rng = make_rng(c.seed, 0xF1);
  const std::size_t n = static_cast<std::size_t>(x.cols());
  const std::size_t batch = c.batch_size > 0 ? static_cast<std::size_t>(c.batch_size) : n;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  auto score = [&](const FusionNet& m) {
    if (xv.cols() == 0) return 0.0;
    const auto [pa, pm] = m.predict(xv);
    return 0.5 * (hit_rate(pa, va) + hit_rate(pm, vm));
  };
  Fitted best{net, -1.0};
  ForwardCache ct, ca, cm;
  std::vector<DenseLayer> gt, ga, gm;
  Matrix grad_a, grad_m;
  for (int epoch = 0; epoch < c.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t len = std::min(batch, n - start);
      const std::span<const std::size_t> idx(order.data() + start, len);
      const Matrix xb = gather_columns(x, idx);
      const auto ab = pick(ya, idx), mb = pick(ym, idx);
      const Matrix z = net.trunk.logits(xb, &ct);
      const Matrix h = z.cwiseMax(0.0);
      cross_entropy(net.action_head.logits(h, &ca), ab, &grad_a);
      cross_entropy(net.material_head.logits(h, &cm), mb, &grad_m);
      Matrix dh = net.action_head.backward(ca, grad_a, ga) + net.material_head.backward(cm, grad_m, gm);
      dh.array() *= (z.array() > 0.0).cast<double>();
      net.trunk.backward(ct, dh, gt);
      opt_t.step(net.trunk, gt);
      opt_a.step(net.action_head, ga);
      opt_m.step(net.material_head, gm);
    }
    if ((epoch + 1) % 10 == 0 || epoch + 1 == c.max_epochs) {
      const double v = score(net);
      if (v > best.val_score) best = {net, v};
    }
  }
  return best;
}

void tally(Confusion& m, std::span<const int> truth, std::span<const int> pred) {
  for (std::size_t i = 0; i < truth.size(); ++i)
    ++m[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(pred[i])];
}

}  // namespace

FusionResult fusion_experiment(const FusionDataset& data, FingerMode mode,
                               std::span<const ModalityKind> modalities, const FusionConfig& config) {
  if (modalities.empty()) throw Error(Errc::kMissingModality, "no modality selected");
  std::vector<int> mods;
  for (auto k : modalities) {
    const int idx = window_modality_index(k);
    if (idx < 0)
      throw Error(Errc::kMissingModality, std::string(modality_name(k)) + " is not part of a window");
    if (std::find(mods.begin(), mods.end(), idx) == mods.end()) mods.push_back(idx);
  }
  std::sort(mods.begin(), mods.end());
  if (data.windows.empty()) throw Error(Errc::kEmptyDataset, "no encoded windows");
  if (config.lr_grid.empty() || config.max_epochs < 1)
    throw Error(Errc::kInvalidArgument, "need a learning rate and at least one epoch");

  Samples s = assemble(data, mode, mods);
  if (config.shuffle_labels) {
    // Permute labels between trials so every finger of a trial keeps one label.
    std::vector<std::uint32_t> groups = s.group;
    std::sort(groups.begin(), groups.end());
    groups.erase(std::unique(groups.begin(), groups.end()), groups.end());
    std::vector<std::pair<int, int>> labels(groups.size());
    for (std::size_t i = 0; i < s.group.size(); ++i) {
      const auto g = static_cast<std::size_t>(std::lower_bound(groups.begin(), groups.end(), s.group[i]) - groups.begin());
      labels[g] = {s.action[i], s.material[i]};
    }
    std::vector<std::pair<int, int>> permuted = labels;
    Rng rng = make_rng(config.seed, 0x5AFF1E);
    std::shuffle(permuted.begin(), permuted.end(), rng);
    for (std::size_t i = 0; i < s.group.size(); ++i) {
      const auto g = static_cast<std::size_t>(std::lower_bound(groups.begin(), groups.end(), s.group[i]) - groups.begin());
      s.action[i] = permuted[g].first;
      s.material[i] = permuted[g].second;
    }
  }

  const Split sp = split_by_group(s, config);
  if (sp.train.empty() || sp.test.empty()) throw Error(Errc::kEmptyDataset, "too few trials to split");
  const Standardizer norm = Standardizer::fit(gather_columns(s.x, sp.train));
  const Matrix xt = norm.apply(gather_columns(s.x, sp.train));
  const Matrix xv = norm.apply(gather_columns(s.x, sp.val));
  const Matrix xs = norm.apply(gather_columns(s.x, sp.test));
  const auto ta = pick(s.action, sp.train), tm = pick(s.material, sp.train);
  const auto va = pick(s.action, sp.val), vm = pick(s.material, sp.val);
  const auto sa = pick(s.action, sp.test), sm = pick(s.material, sp.test);

  std::optional<Fitted> best;
  double best_lr = 0.0;
  for (double lr : config.lr_grid) {
    Fitted f = fit(xt, ta, tm, xv, va, vm, lr, config);
    if (!best || f.val_score > best->val_score) {
      best = std::move(f);
      best_lr = lr;
    }
  }

  const auto [pa, pm] = best->net.predict(xs);
  FusionResult r;
  r.action_accuracy = hit_rate(pa, sa);
  r.material_accuracy = hit_rate(pm, sm);
  tally(r.action_confusion, sa, pa);
  tally(r.material_confusion, sm, pm);
  r.chosen_lr = best_lr;
  r.train_size = sp.train.size() + sp.val.size();
  r.test_size = sp.test.size();
  return r;
}

}  // namespace tactile::nn
