#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "tactile/core_model.hpp"
#include "tactile/nn.hpp"
#include "tactile/synth.hpp"

namespace tactile::nn {

using Confusion = std::array<std::array<std::size_t, 3>, 3>;  // [truth][predicted]

// ---------------------------------------------------------------- gas ------

struct GasRun {
  synth::ObjectMaterial material = synth::ObjectMaterial::kCoffeePowder;
  int label = 0;
  std::vector<GasReading> readings;  // one approach, starting in ambient air
};

// `runs_per_material` approaches per material, labelled by position in
// `materials`.
std::vector<GasRun> make_gas_runs(std::span<const synth::ObjectMaterial> materials,
                                  int runs_per_material, double approach_s, std::uint64_t seed,
                                  const synth::GasModel& model = {});

struct GasExperimentConfig {
  int hidden = 64;
  double lr = 0.1;
  int epochs = 300;
  double train_fraction = 0.7;
  double rate_hz = 1.0;
  std::uint64_t seed = 1;
};

struct GasResult {
  double accuracy = 0.0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  int classes = 0;
};

// Mean of each channel over the first `integration_s` of every approach,
// z-scored with training statistics, into a one-hidden-layer classifier.
// The split is stratified per class. Throws InvalidArgument when the
// integration time exceeds the recorded approach.
GasResult gas_experiment(std::span<const GasRun> runs, double integration_s,
                         const GasExperimentConfig& config = {});

// ------------------------------------------------------------- fusion ------

inline constexpr std::array<ModalityKind, 4> kWindowModalities = {
    ModalityKind::kVisuotactile, ModalityKind::kSurfaceAudio, ModalityKind::kSurfacePressure,
    ModalityKind::kInertial};

// Position of a window modality in EncodedWindow::features, or -1.
int window_modality_index(ModalityKind kind);

struct EncodedWindow {
  std::uint32_t group = 0;  // trial; fingers of one trial share it
  unsigned finger = 0;
  int action = 0;
  int material = 0;
  std::array<Vector, 4> features;  // ordered as kWindowModalities
};

// Compact encoders standing in for per-modality CNNs. `reference` is an
// optional no-contact frame (120x120x3, count units) that visuotactile
// features are measured against.
std::array<Vector, 4> encode_window(const WindowSample& window,
                                    const std::vector<double>* reference = nullptr);

struct FusionDatasetConfig {
  int trials_per_combo = 50;
  double trial_s = 1.5;
  double window_offset_s = 0.17;
  double visuotactile_rate_hz = 10.0;
  std::uint64_t seed = 1;
};

struct FusionDataset {
  std::vector<EncodedWindow> windows;
  std::size_t groups = 0;
};

// One scripted touch per trial (every action x material combination), all four
// fingers on the object, one labelled window per finger.
FusionDataset make_fusion_dataset(const FusionDatasetConfig& config = {});

// Encodes labelled windows; unlabelled windows are skipped.
FusionDataset encode_windows(std::span<const WindowSample> windows,
                             std::span<const std::uint32_t> groups,
                             const std::vector<double>* reference = nullptr);

enum class FingerMode { kIndependent, kDependent };

struct FusionConfig {
  std::vector<double> lr_grid = {0.003, 0.01, 0.03};
  int max_epochs = 200;
  int batch_size = 32;
  int trunk_width = 64;
  int head_width = 32;
  double train_fraction = 0.7;
  double validation_fraction = 0.2;  // of the training groups
  bool shuffle_labels = false;
  std::uint64_t seed = 1;
};

struct FusionResult {
  double action_accuracy = 0.0;
  double material_accuracy = 0.0;
  Confusion action_confusion{};
  Confusion material_confusion{};
  double chosen_lr = 0.0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
};

// Shared trunk over the concatenated modality features, two softmax heads.
// Throws MissingModality for an empty subset or a modality outside the window.
FusionResult fusion_experiment(const FusionDataset& data, FingerMode mode,
                               std::span<const ModalityKind> modalities,
                               const FusionConfig& config = {});

}  // namespace tactile::nn
