#include <doctest.h>
#include <zlib.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "hee/data.hpp"
#include "hee/error.hpp"

using namespace hee;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "hee_test_data";
  fs::create_directories(dir);
  return dir;
}

void be32(std::string& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<char>((v >> s) & 0xff));
}

// Two 2x2 images: all zeros and all 255.
std::string image_bytes(std::uint32_t magic = 0x803, std::uint32_t count = 2) {
  std::string b;
  be32(b, magic);
  be32(b, count);
  be32(b, 2);
  be32(b, 2);
  b.append(4, '\0');
  b.append(4, static_cast<char>(255));
  return b;
}

std::string label_bytes(std::uint32_t count = 2) {
  std::string b;
  be32(b, 0x801);
  be32(b, count);
  b.push_back(3);
  b.push_back(7);
  return b.substr(0, 8 + std::min<std::uint32_t>(count, 2));
}

std::string write_raw(const std::string& name, const std::string& bytes) {
  const std::string path = (scratch_dir() / name).string();
  std::ofstream(path, std::ios::binary) << bytes;
  return path;
}

std::string write_gz(const std::string& name, const std::string& bytes) {
  const std::string path = (scratch_dir() / name).string();
  gzFile f = gzopen(path.c_str(), "wb");
  gzwrite(f, bytes.data(), static_cast<unsigned>(bytes.size()));
  gzclose(f);
  return path;
}

}  // namespace

TEST_CASE("MoG4 symmetry and exact density") {
  const int n = 40000;
  const Dataset2D d = generate_dataset(Generator::MoG4, n, 1);
  int quadrant[4] = {0, 0, 0, 0};
  for (int i = 0; i < n; ++i) quadrant[(d.points(i, 0) > 0) + 2 * (d.points(i, 1) > 0)]++;
  const double sd = std::sqrt(n * 0.25 * 0.75);
  for (int q : quadrant) CHECK(std::abs(q - n / 4.0) < 3.0 * sd);

  // Per-coordinate variance is 4 + 0.09.
  const Eigen::RowVector2d mean = d.points.colwise().mean();
  const double se = std::sqrt(4.09 / n);
  CHECK(std::abs(mean[0]) < 3.0 * se);
  CHECK(std::abs(mean[1]) < 3.0 * se);

  // Direct evaluation at (2, 2): the nearest component dominates.
  const double var = 0.09;
  double direct = 0.0;
  for (double mx : {-2.0, 2.0}) {
    for (double my : {-2.0, 2.0}) {
      const double r2 = (2 - mx) * (2 - mx) + (2 - my) * (2 - my);
      direct += 0.25 * std::exp(-0.5 * r2 / var) / (2 * M_PI * var);
    }
  }
  CHECK(std::abs(mog4_log_density(2.0, 2.0) - std::log(direct)) < 1e-12);

  // Integrates to one on a dense grid.
  const double h = 0.01;
  double total = 0.0;
  for (double x = -5.0; x <= 5.0; x += h) {
    for (double y = -5.0; y <= 5.0; y += h) total += std::exp(mog4_log_density(x, y)) * h * h;
  }
  CHECK(std::abs(total - 1.0) < 1e-4);
}

TEST_CASE("bananas4 symmetry and curvature") {
  const int n = 40000;
  const Dataset2D d = generate_dataset(Generator::Bananas4, n, 2);
  int sector[4] = {0, 0, 0, 0};
  double curv = 0.0;
  int own = 0;
  for (int i = 0; i < n; ++i) {
    // Sectors centred on the +y, -x, -y, +x axes.
    const double a = std::atan2(d.points(i, 1), d.points(i, 0)) - M_PI / 2 + M_PI / 4;
    const int s = static_cast<int>(std::floor((a + 4 * M_PI) / (M_PI / 2))) % 4;
    sector[s]++;
    if (d.labels[i] == 0) {
      const double b1 = d.points(i, 0) / 0.7, b2 = (d.points(i, 1) - 2.0) / 0.7;
      curv += b2 - 0.5 * b1 * b1 + 1.0;
      ++own;
    }
  }
  const double sd = std::sqrt(n * 0.25 * 0.75);
  for (int s : sector) CHECK(std::abs(s - n / 4.0) < 4.0 * sd);
  // z2 has standard deviation 0.5.
  CHECK(std::abs(curv / own) < 3.0 * 0.5 / std::sqrt(own));
  const Eigen::RowVector2d mean = d.points.colwise().mean();
  CHECK(mean.norm() < 0.05);
}

TEST_CASE("pinwheel symmetry and five angular peaks") {
  const int n = 100000;
  const Dataset2D d = generate_dataset(Generator::Pinwheel, n, 3);
  int arm[5] = {0, 0, 0, 0, 0};
  for (int k : d.labels) arm[k]++;
  const double sd = std::sqrt(n * 0.2 * 0.8);
  for (int a : arm) CHECK(std::abs(a - n / 5.0) < 3.0 * sd);
  const Eigen::RowVector2d mean = d.points.colwise().mean();
  CHECK(mean.norm() < 0.05);

  const int bins = 72;
  std::vector<double> hist(bins, 0.0);
  for (int i = 0; i < n; ++i) {
    const double a = std::atan2(d.points(i, 1), d.points(i, 0)) + M_PI;
    hist[std::min(bins - 1, static_cast<int>(a / (2 * M_PI) * bins))] += 1.0;
  }
  std::vector<double> smooth(bins);
  for (int b = 0; b < bins; ++b) {
    smooth[b] = (hist[(b + bins - 1) % bins] + hist[b] + hist[(b + 1) % bins]) / 3.0;
  }
  const double level = static_cast<double>(n) / bins;
  int peaks = 0;
  for (int b = 0; b < bins; ++b) {
    const double l = smooth[(b + bins - 1) % bins], r = smooth[(b + 1) % bins];
    if (smooth[b] > l && smooth[b] >= r && smooth[b] > level) ++peaks;
  }
  CHECK(peaks == 5);
}

TEST_CASE("generators are deterministic per seed") {
  for (Generator g : {Generator::MoG4, Generator::Bananas4, Generator::Pinwheel}) {
    const Dataset2D a = generate_dataset(g, 500, 11), b = generate_dataset(g, 500, 11);
    CHECK(a.points == b.points);
    CHECK(a.labels == b.labels);
    CHECK(generate_dataset(g, 500, 12).points != a.points);
  }
  CHECK(parse_generator("pinwheel") == Generator::Pinwheel);
  CHECK_THROWS_AS(parse_generator("swissroll"), ConfigError);
}

TEST_CASE("IDX loader") {
  const std::string labels = write_raw("labels.idx", label_bytes());
  SUBCASE("raw fixture") {
    const ImageSet set = load_idx(write_raw("images.idx", image_bytes()), labels);
    CHECK(set.images.rows() == 2);
    CHECK(set.images.cols() == 4);
    CHECK(set.rows == 2);
    CHECK(set.images.row(0).isZero(0.0));
    CHECK((set.images.row(1).array() == 1.0).all());
    CHECK(set.labels == std::vector<int>{3, 7});
  }
  SUBCASE("gzip fixture and limit") {
    const ImageSet set = load_idx(write_gz("images.idx.gz", image_bytes()),
                                  write_gz("labels.idx.gz", label_bytes()), 1);
    CHECK(set.images.rows() == 1);
    CHECK(set.labels == std::vector<int>{3});
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(load_idx(write_raw("bad.idx", image_bytes(0x802)), labels), BadMagic);
    const std::string full = image_bytes();
    CHECK_THROWS_AS(load_idx(write_raw("short.idx", full.substr(0, full.size() - 2)), labels),
                    TruncatedFile);
    CHECK_THROWS_AS(load_idx(write_raw("three.idx", image_bytes(0x803, 3)), labels),
                    DimensionMismatch);
    CHECK_THROWS_AS(load_idx("/nonexistent/images", labels), IoError);
  }
}

TEST_CASE("CSV round trip") {
  Eigen::MatrixXd m(3, 2);
  m << 0.1, -2.5e-17, 1.0 / 3.0, 4.0, -7.25, 1e300;
  const std::string path = (scratch_dir() / "points.csv").string();
  write_csv(path, column_names(2), m);
  const CsvTable t = read_csv(path);
  CHECK(t.header == std::vector<std::string>{"x0", "x1"});
  CHECK(t.rows == m);

  std::ofstream(path) << "a,b\n1,2\n3\n";
  CHECK_THROWS_AS(read_csv(path), IoError);
}
