#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "noisycover/dataio.hpp"

using namespace noisycover;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("noisycover_dataio_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_bytes(const fs::path& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

// Hand-assembled 3 images of 2x2 pixels.
const std::vector<unsigned char> kImages = {0x00, 0x00, 0x08, 0x03, 0, 0, 0, 3, 0, 0, 0, 2,
                                            0,    0,    0,    2,    0, 255, 51, 102,
                                            255,  255,  0,    0,    10, 20, 30, 40};
const std::vector<unsigned char> kLabels = {0x00, 0x00, 0x08, 0x01, 0, 0, 0, 3, 4, 0, 2};

}  // namespace

TEST_CASE("hand-built IDX fixture") {
  const fs::path dir = scratch_dir("fixture");
  write_bytes(dir / "img", kImages);
  write_bytes(dir / "lab", kLabels);
  const Dataset d = load_idx(dir / "img", dir / "lab");
  CHECK(d.size() == 3);
  CHECK(d.dim() == 4);
  CHECK(d.num_classes == 5);
  CHECK(d.labels == std::vector<int>{4, 0, 2});
  CHECK(d.images(0, 1) == doctest::Approx(1.0));
  CHECK(d.images(0, 2) == doctest::Approx(0.2));
  CHECK(d.images(0, 3) == doctest::Approx(0.4));
  CHECK(d.images(2, 0) == doctest::Approx(10.0 / 255));
  CHECK(d.row(1)[0] == doctest::Approx(1.0));

  write_idx(d, dir / "img2", dir / "lab2", 2, 2);
  const Dataset back = load_idx(dir / "img2", dir / "lab2");
  CHECK(back.images == d.images);
  CHECK(back.labels == d.labels);
}

TEST_CASE("IDX errors") {
  const fs::path dir = scratch_dir("errors");
  write_bytes(dir / "img", kImages);
  write_bytes(dir / "lab", kLabels);

  auto bad_magic = kImages;
  bad_magic[3] = 0x04;
  write_bytes(dir / "bad_magic", bad_magic);
  CHECK_THROWS_WITH_AS(load_idx(dir / "bad_magic", dir / "lab"),
                       doctest::Contains("bad magic"), IdxError);

  auto short_labels = kLabels;
  short_labels[7] = 2;
  short_labels.pop_back();
  write_bytes(dir / "short_labels", short_labels);
  CHECK_THROWS_WITH_AS(load_idx(dir / "img", dir / "short_labels"),
                       doctest::Contains("count mismatch"), IdxError);

  auto truncated = kImages;
  truncated.resize(truncated.size() - 3);
  write_bytes(dir / "truncated", truncated);
  CHECK_THROWS_WITH_AS(load_idx(dir / "truncated", dir / "lab"), doctest::Contains("truncated"),
                       IdxError);

  CHECK_THROWS_AS(load_idx(dir / "missing", dir / "lab"), IdxError);
}

TEST_CASE("subset, replicate, split") {
  const fs::path dir = scratch_dir("split");
  write_bytes(dir / "img", kImages);
  write_bytes(dir / "lab", kLabels);
  const Dataset d = load_idx(dir / "img", dir / "lab");

  const std::vector<std::int64_t> idx{2, 0};
  const Dataset s = d.subset(idx, "s");
  CHECK(s.labels == std::vector<int>{2, 4});
  CHECK(s.images.row(0) == d.images.row(2));

  const Dataset r = d.replicate(3);
  CHECK(r.size() == 9);
  CHECK(r.images.row(7) == d.images.row(1));
  CHECK(r.labels[8] == 2);
  CHECK_THROWS_AS(d.replicate(0), std::invalid_argument);

  const TrainValSplit sp = split(d, 2, 1, 5);
  CHECK(sp.train.size() == 2);
  CHECK(sp.validation.size() == 1);
  std::vector<int> all = sp.train.labels;
  all.push_back(sp.validation.labels[0]);
  std::sort(all.begin(), all.end());
  CHECK(all == std::vector<int>{0, 2, 4});
  const TrainValSplit again = split(d, 2, 1, 5);
  CHECK(again.train.labels == sp.train.labels);
  CHECK_THROWS_AS(split(d, 3, 1, 5), std::invalid_argument);
}

TEST_CASE("normalized input Frobenius norm") {
  Dataset d;
  d.images.resize(2, 2);
  d.images << 1.0, 0.0, 0.0, 1.0;
  d.labels = {0, 1};
  // sqrt((1 + 1) / 2)
  CHECK(input_frobenius(d) == doctest::Approx(1.0));
  d.images(0, 1) = 1.0;
  CHECK(input_frobenius(d) == doctest::Approx(std::sqrt(1.5)));
}
