#include "noisycover/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace noisycover {

namespace {

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_f64(std::vector<unsigned char>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(bits >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(const std::vector<unsigned char>& bytes) : bytes_(bytes) {}

  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw CheckpointError("truncated checkpoint");
  }
  unsigned char u8() {
    need(1);
    return bytes_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes_[pos_++]} << (8 * i);
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{bytes_[pos_++]} << (8 * i);
    return std::bit_cast<double>(v);
  }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  const std::vector<unsigned char>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<unsigned char> encode_checkpoint(const ParamSet& params) {
  std::vector<unsigned char> out(std::begin(kCheckpointMagic), std::end(kCheckpointMagic));
  out.push_back(kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(params.depth() + 1));
  put_u32(out, static_cast<std::uint32_t>(params.input_dim()));
  for (const Matrix& w : params.weights) put_u32(out, static_cast<std::uint32_t>(w.cols()));
  for (const Matrix& w : params.weights) {
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) put_f64(out, w(r, c));
    }
  }
  return out;
}

ParamSet decode_checkpoint(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 5 || std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0) {
    throw CheckpointError("bad magic: not an NCAP checkpoint");
  }
  Reader in(bytes);
  for (int i = 0; i < 4; ++i) in.u8();
  const unsigned char version = in.u8();
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  }
  const std::uint32_t count = in.u32();
  if (count < 2) throw CheckpointError("checkpoint needs at least one layer");
  std::vector<std::uint32_t> dims(count);
  for (auto& d : dims) {
    d = in.u32();
    if (d == 0) throw CheckpointError("zero layer width in checkpoint");
  }
  ParamSet params;
  for (std::uint32_t l = 0; l + 1 < count; ++l) {
    Matrix w(dims[l], dims[l + 1]);
    in.need(std::size_t{dims[l]} * dims[l + 1] * 8);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = in.f64();
    }
    params.weights.push_back(std::move(w));
  }
  if (!in.at_end()) throw CheckpointError("trailing bytes after checkpoint payload");
  return params;
}

void save_checkpoint(const ParamSet& params, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(params);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

ParamSet load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path.string());
  std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>()};
  return decode_checkpoint(bytes);
}

}  // namespace noisycover
