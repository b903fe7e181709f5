#include "tactile/record_log.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>

namespace tactile {
namespace {

static_assert(std::endian::native == std::endian::little,
              "record log codec assumes a little-endian host");

class Writer {
 public:
  explicit Writer(std::vector<std::uint8_t>& out) : out_(out) {}

  template <typename T>
  void put(T v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    out_.insert(out_.end(), p, p + sizeof(T));
  }
  void put_bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    out_.insert(out_.end(), p, p + n);
  }

 private:
  std::vector<std::uint8_t>& out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  bool has(std::size_t n) const { return pos_ + n <= in_.size(); }
  bool done() const { return pos_ == in_.size(); }

  template <typename T>
  T get(Errc on_short) {
    if (!has(sizeof(T))) throw Error(on_short, "unexpected end of log");
    T v;
    std::memcpy(&v, in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::span<const std::uint8_t> take(std::size_t n, Errc on_short) {
    if (!has(n)) throw Error(on_short, "unexpected end of log");
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

void encode_payload(Writer& w, const Payload& payload) {
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ImageFrame>) {
          w.put<std::uint16_t>(p.width);
          w.put<std::uint16_t>(p.height);
          w.put_bytes(p.pixels.data(), p.pixels.size());
        } else if constexpr (std::is_same_v<T, AudioFrame>) {
          w.put_bytes(p.samples.data(), p.samples.size() * sizeof(std::int16_t));
        } else if constexpr (std::is_same_v<T, PressureReading>) {
          for (float v : p.channels) w.put(v);
        } else if constexpr (std::is_same_v<T, InertialReading>) {
          for (float v : p.accel_mps2) w.put(v);
        } else if constexpr (std::is_same_v<T, GasReading>) {
          w.put(p.oxidation_resistance_ohm);
          w.put(p.humidity_pct);
          w.put(p.temperature_c);
          w.put(p.pressure_hpa);
        } else {
          w.put(p.temperature_c);
        }
      },
      payload);
}

Payload decode_payload(const StreamDescriptor& desc, std::span<const std::uint8_t> body) {
  Reader r(body);
  auto fixed = [&](std::size_t n) {
    if (body.size() != n * sizeof(float))
      throw Error(Errc::kShapeMismatch, "payload length does not match stream kind");
  };
  switch (desc.kind) {
    case ModalityKind::kVisuotactile: {
      ImageFrame img;
      img.width = r.get<std::uint16_t>(Errc::kShapeMismatch);
      img.height = r.get<std::uint16_t>(Errc::kShapeMismatch);
      img.channels = static_cast<std::uint8_t>(desc.channels);
      const std::size_t n = static_cast<std::size_t>(img.width) * img.height * img.channels;
      if (body.size() != 4 + n)
        throw Error(Errc::kShapeMismatch, "image payload length mismatch");
      auto px = r.take(n, Errc::kShapeMismatch);
      img.pixels.assign(px.begin(), px.end());
      return img;
    }
    case ModalityKind::kSurfaceAudio: {
      AudioFrame a;
      a.channels = desc.channels;
      if (body.size() % (2 * desc.channels) != 0)
        throw Error(Errc::kShapeMismatch, "audio payload is not whole frames");
      a.samples.resize(body.size() / 2);
      std::memcpy(a.samples.data(), body.data(), body.size());
      return a;
    }
    case ModalityKind::kSurfacePressure: {
      fixed(4);
      PressureReading p;
      for (float& v : p.channels) v = r.get<float>(Errc::kShapeMismatch);
      return p;
    }
    case ModalityKind::kInertial: {
      fixed(3);
      InertialReading p;
      for (float& v : p.accel_mps2) v = r.get<float>(Errc::kShapeMismatch);
      return p;
    }
    case ModalityKind::kGas: {
      fixed(4);
      GasReading g;
      g.oxidation_resistance_ohm = r.get<float>(Errc::kShapeMismatch);
      g.humidity_pct = r.get<float>(Errc::kShapeMismatch);
      g.temperature_c = r.get<float>(Errc::kShapeMismatch);
      g.pressure_hpa = r.get<float>(Errc::kShapeMismatch);
      return g;
    }
    case ModalityKind::kHeat: {
      fixed(1);
      return HeatReading{r.get<float>(Errc::kShapeMismatch)};
    }
  }
  throw Error(Errc::kUnknownKind, "unknown stream kind");
}

}  // namespace

const StreamDescriptor* RecordLog::find_stream(std::uint16_t stream_id) const {
  for (const auto& s : streams) {
    if (s.stream_id == stream_id) return &s;
  }
  return nullptr;
}

std::size_t payload_size(const Payload& payload) {
  return std::visit(
      [](const auto& p) -> std::size_t {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ImageFrame>) return 4 + p.pixels.size();
        else if constexpr (std::is_same_v<T, AudioFrame>) return p.samples.size() * 2;
        else if constexpr (std::is_same_v<T, PressureReading>) return 16;
        else if constexpr (std::is_same_v<T, InertialReading>) return 12;
        else if constexpr (std::is_same_v<T, GasReading>) return 16;
        else return 4;
      },
      payload);
}

std::vector<std::uint8_t> encode_log(const RecordLog& log) {
  std::map<std::uint16_t, const StreamDescriptor*> by_id;
  for (const auto& d : log.streams) {
    validate_descriptor(d);
    if (!by_id.emplace(d.stream_id, &d).second)
      throw Error(Errc::kInvalidArgument, "duplicate stream id " + std::to_string(d.stream_id));
  }
  std::size_t total = 8 + log.streams.size() * 16;
  for (const auto& s : log.samples) total += 14 + payload_size(s.payload);

  std::vector<std::uint8_t> out;
  out.reserve(total);
  Writer w(out);
  w.put_bytes(kRecordLogMagic.data(), kRecordLogMagic.size());
  w.put<std::uint16_t>(kRecordLogVersion);
  w.put<std::uint16_t>(static_cast<std::uint16_t>(log.streams.size()));
  for (const auto& d : log.streams) {
    w.put<std::uint16_t>(d.stream_id);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(d.kind));
    w.put<std::uint8_t>(d.sample_bits);
    w.put<std::uint32_t>(d.channels);
    w.put<double>(d.rate_hz);
  }

  std::map<std::uint16_t, std::uint64_t> last_t;
  for (const auto& s : log.samples) {
    auto it = by_id.find(s.stream_id);
    if (it == by_id.end())
      throw Error(Errc::kInvalidArgument, "sample references undeclared stream");
    if (!payload_matches(*it->second, s.payload))
      throw Error(Errc::kShapeMismatch, "payload does not match stream descriptor");
    auto [pos, fresh] = last_t.emplace(s.stream_id, s.t.value);
    if (!fresh) {
      if (s.t.value < pos->second)
        throw Error(Errc::kInvalidArgument, "samples not time-sorted within stream");
      pos->second = s.t.value;
    }
    w.put<std::uint16_t>(s.stream_id);
    w.put<std::uint64_t>(s.t.value);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(payload_size(s.payload)));
    encode_payload(w, s.payload);
  }
  return out;
}

RecordLog decode_log(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (!r.has(4) || std::memcmp(bytes.data(), kRecordLogMagic.data(), 4) != 0)
    throw Error(Errc::kBadMagic, "not a record log");
  r.take(4, Errc::kBadMagic);
  const auto version = r.get<std::uint16_t>(Errc::kTruncatedChunk);
  if (version != kRecordLogVersion)
    throw Error(Errc::kVersionMismatch, "log version " + std::to_string(version));
  const auto count = r.get<std::uint16_t>(Errc::kTruncatedChunk);

  RecordLog log;
  std::map<std::uint16_t, std::size_t> index;
  for (std::uint16_t i = 0; i < count; ++i) {
    StreamDescriptor d;
    d.stream_id = r.get<std::uint16_t>(Errc::kTruncatedChunk);
    const auto kind = r.get<std::uint8_t>(Errc::kTruncatedChunk);
    if (!is_known_kind(kind)) throw Error(Errc::kUnknownKind, "descriptor kind");
    d.kind = static_cast<ModalityKind>(kind);
    d.sample_bits = r.get<std::uint8_t>(Errc::kTruncatedChunk);
    d.channels = r.get<std::uint32_t>(Errc::kTruncatedChunk);
    d.rate_hz = r.get<double>(Errc::kTruncatedChunk);
    validate_descriptor(d);
    index[d.stream_id] = log.streams.size();
    log.streams.push_back(d);
  }

  while (!r.done()) {
    ModalitySample s;
    s.stream_id = r.get<std::uint16_t>(Errc::kTruncatedChunk);
    s.t.value = r.get<std::uint64_t>(Errc::kTruncatedChunk);
    const auto len = r.get<std::uint32_t>(Errc::kTruncatedChunk);
    auto body = r.take(len, Errc::kTruncatedChunk);
    auto it = index.find(s.stream_id);
    if (it == index.end())
      throw Error(Errc::kShapeMismatch, "chunk for undeclared stream " + std::to_string(s.stream_id));
    s.payload = decode_payload(log.streams[it->second], body);
    log.samples.push_back(std::move(s));
  }
  return log;
}

std::size_t write_log(const RecordLog& log, const std::filesystem::path& path) {
  const auto bytes = encode_log(log);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::kIoError, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::kIoError, "write failed for " + path.string());
  return bytes.size();
}

RecordLog read_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIoError, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_log(bytes);
}

}  // namespace tactile
