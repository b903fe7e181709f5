#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "tactile/core_model.hpp"
#include "tactile/record_log.hpp"

namespace tactile::dsp {

// Returns (action, material) for the window of `finger` centred at `center`,
// or nullopt to leave the window unlabelled.
using WindowLabeler =
    std::function<std::optional<std::pair<Action, Material>>(unsigned finger, TimestampNs center)>;

struct WindowOptions {
  double stride_s = 1.33;
  double offset_s = 0.0;  // start of the first window
};

// Slices a log into 1.33 s windows for every finger that carries the four
// window modalities (visuotactile, audio, pressure, inertial). Windows are
// emitted in start-time order, fingers ascending within one start time.
//
// Throws MissingModality when a finger has only some of the four streams (or
// none has any), InsufficientData when a stream has no samples in a window bin.
void for_each_window(const RecordLog& log, const WindowOptions& options,
                     const WindowLabeler& labeler,
                     const std::function<void(WindowSample&&)>& sink);

std::vector<WindowSample> build_windows(const RecordLog& log, double stride_s,
                                        const WindowLabeler& labeler = {});

// Number of whole windows that fit in [offset, end).
std::size_t window_count(std::uint64_t end_ns, const WindowOptions& options);

}  // namespace tactile::dsp
