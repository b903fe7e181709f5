#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "tactile/core_model.hpp"

namespace tactile {

// Binary record/replay container.
//
// Layout (all integers little-endian):
//   header:  "D36R" | u16 version | u16 descriptor_count
//            descriptor_count x { u16 stream_id | u8 kind | u8 sample_bits |
//                                 u32 channels | f64 rate_hz }
//   chunks:  { u16 stream_id | u64 t_ns | u32 payload_len | payload }
//
// Payloads per modality:
//   visuotactile  u16 width | u16 height | width*height*channels u8
//   audio         interleaved i16 frames
//   pressure      4 x f32
//   inertial      3 x f32 (m/s^2)
//   gas           f32 ohm | f32 humidity % | f32 temperature C | f32 hPa
//   heat          f32 temperature C
struct RecordLog {
  std::vector<StreamDescriptor> streams;
  std::vector<ModalitySample> samples;

  const StreamDescriptor* find_stream(std::uint16_t stream_id) const;
  bool operator==(const RecordLog&) const = default;
};

inline constexpr std::array<char, 4> kRecordLogMagic = {'D', '3', '6', 'R'};
inline constexpr std::uint16_t kRecordLogVersion = 1;

std::vector<std::uint8_t> encode_log(const RecordLog& log);
RecordLog decode_log(std::span<const std::uint8_t> bytes);

// Returns the number of bytes written.
std::size_t write_log(const RecordLog& log, const std::filesystem::path& path);
RecordLog read_log(const std::filesystem::path& path);

// Encoded size of a payload body, excluding the chunk header.
std::size_t payload_size(const Payload& payload);

}  // namespace tactile
