#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "tactile/error.hpp"
#include "tactile/nn.hpp"

namespace tactile::nn {

namespace {

constexpr char kMagic[4] = {'D', '3', '6', 'W'};

template <typename T>
void put(std::vector<std::uint8_t>& out, T v) {
  static_assert(std::endian::native == std::endian::little, "little-endian host assumed");
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : bytes_(b) {}
  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > bytes_.size()) throw Error(Errc::kTruncatedChunk, "weights file truncated");
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize(const MlpModel& model) {
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  put<std::uint16_t>(out, kWeightsVersion);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(model.spec().hidden));
  put<std::uint8_t>(out, static_cast<std::uint8_t>(model.spec().head));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.layers().size()));
  for (const auto& l : model.layers()) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(l.weight.rows()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(l.weight.cols()));
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) put<double>(out, l.weight(r, c));
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) put<double>(out, l.bias(r));
  }
  return out;
}

MlpModel deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw Error(Errc::kBadMagic, "not a weights file");
  Reader in(bytes.subspan(4));
  const auto version = in.get<std::uint16_t>();
  if (version != kWeightsVersion)
    throw Error(Errc::kVersionMismatch, "weights version " + std::to_string(version));
  const auto hidden = in.get<std::uint8_t>();
  const auto head = in.get<std::uint8_t>();
  if (hidden > 1 || head > 1) throw Error(Errc::kShapeMismatch, "unknown activation tag");
  const auto count = in.get<std::uint32_t>();
  if (count == 0) throw Error(Errc::kShapeMismatch, "model without layers");

  MlpSpec spec;
  spec.hidden = static_cast<Activation>(hidden);
  spec.head = static_cast<OutputHead>(head);
  std::vector<DenseLayer> layers;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto rows = in.get<std::uint32_t>();
    const auto cols = in.get<std::uint32_t>();
    if (rows == 0 || cols == 0) throw Error(Errc::kShapeMismatch, "empty layer");
    if (i == 0) spec.layer_sizes.push_back(static_cast<int>(cols));
    else if (static_cast<int>(cols) != spec.layer_sizes.back())
      throw Error(Errc::kShapeMismatch, "layer shapes do not chain");
    if (in.remaining() / sizeof(double) < static_cast<std::size_t>(rows) * (cols + 1))
      throw Error(Errc::kTruncatedChunk, "weights file truncated");
    spec.layer_sizes.push_back(static_cast<int>(rows));
    DenseLayer l{Matrix(rows, cols), Vector(rows)};
    for (std::uint32_t r = 0; r < rows; ++r) {
      for (std::uint32_t c = 0; c < cols; ++c) l.weight(r, c) = in.get<double>();
    }
    for (std::uint32_t r = 0; r < rows; ++r) l.bias(r) = in.get<double>();
    layers.push_back(std::move(l));
  }
  if (in.remaining() != 0) throw Error(Errc::kShapeMismatch, "trailing bytes after weights");
  MlpModel model(spec);
  model.layers() = std::move(layers);
  return model;
}

void save_model(const MlpModel& model, const std::filesystem::path& path) {
  const auto bytes = serialize(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::kIoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::kIoError, "write failed for " + path.string());
}

MlpModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIoError, "cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

}  // namespace tactile::nn
