#include "hee/data.hpp"

#include <zlib.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "hee/error.hpp"

namespace hee {

std::string_view to_string(Generator generator) {
  switch (generator) {
    case Generator::MoG4: return "mog4";
    case Generator::Bananas4: return "bananas4";
    case Generator::Pinwheel: return "pinwheel";
  }
  return "mog4";
}

Generator parse_generator(std::string_view name) {
  if (name == "mog4") return Generator::MoG4;
  if (name == "bananas4") return Generator::Bananas4;
  if (name == "pinwheel") return Generator::Pinwheel;
  throw ConfigError("data.generator", "unknown generator '" + std::string(name) + "'");
}

Eigen::MatrixXd mog4_means() {
  Eigen::MatrixXd m(4, 2);
  for (int k = 0; k < 4; ++k) {
    m(k, 0) = (k & 1) ? 2.0 : -2.0;
    m(k, 1) = (k & 2) ? 2.0 : -2.0;
  }
  return m;
}

Dataset2D gen_mog4(int n, Rng& rng) {
  const Eigen::MatrixXd means = mog4_means();
  Dataset2D d;
  d.generator = Generator::MoG4;
  d.points.resize(n, 2);
  d.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    const int k = static_cast<int>(rng.below(4));
    d.labels[i] = k;
    d.points(i, 0) = means(k, 0) + kMog4Std * rng.normal();
    d.points(i, 1) = means(k, 1) + kMog4Std * rng.normal();
  }
  return d;
}

namespace {

void rotate(double angle, double& x, double& y) {
  const double c = std::cos(angle), s = std::sin(angle);
  const double rx = c * x - s * y;
  y = s * x + c * y;
  x = rx;
}

}  // namespace

Dataset2D gen_bananas4(int n, Rng& rng) {
  Dataset2D d;
  d.generator = Generator::Bananas4;
  d.points.resize(n, 2);
  d.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    const int k = static_cast<int>(rng.below(4));
    const double z1 = rng.normal();
    const double z2 = 0.5 * rng.normal();
    double x = 0.7 * z1;
    double y = 0.7 * (z2 + 0.5 * z1 * z1 - 1.0) + 2.0;
    // Exact quarter turns keep the k = 0 component bit-exact.
    for (int r = 0; r < k; ++r) {
      const double t = x;
      x = -y;
      y = t;
    }
    d.labels[i] = k;
    d.points(i, 0) = x;
    d.points(i, 1) = y;
  }
  return d;
}

Dataset2D gen_pinwheel(int n, Rng& rng) {
  Dataset2D d;
  d.generator = Generator::Pinwheel;
  d.points.resize(n, 2);
  d.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    const int k = static_cast<int>(rng.below(5));
    double x = 2.0 + 0.3 * rng.normal();
    double y = 0.05 * rng.normal();
    rotate(2.0 * M_PI * k / 5.0 + 0.3 * x, x, y);
    d.labels[i] = k;
    d.points(i, 0) = x;
    d.points(i, 1) = y;
  }
  return d;
}

Dataset2D generate_dataset(Generator generator, int n, std::uint64_t seed) {
  Rng rng(seed);
  Dataset2D d;
  switch (generator) {
    case Generator::MoG4: d = gen_mog4(n, rng); break;
    case Generator::Bananas4: d = gen_bananas4(n, rng); break;
    case Generator::Pinwheel: d = gen_pinwheel(n, rng); break;
  }
  d.seed = seed;
  return d;
}

double mog4_log_density(double x, double y) {
  const Eigen::MatrixXd means = mog4_means();
  const double var = kMog4Std * kMog4Std;
  std::array<double, 4> terms;
  for (int k = 0; k < 4; ++k) {
    const double dx = x - means(k, 0), dy = y - means(k, 1);
    terms[k] = -0.5 * (dx * dx + dy * dy) / var;
  }
  double top = terms[0];
  for (double t : terms) top = std::max(top, t);
  double s = 0.0;
  for (double t : terms) s += std::exp(t - top);
  return top + std::log(s) - std::log(4.0) - std::log(2.0 * M_PI * var);
}

namespace {

struct GzCloser {
  void operator()(gzFile f) const { gzclose(f); }
};
using GzFile = std::unique_ptr<gzFile_s, GzCloser>;

GzFile open_gz(const std::string& path) {
  gzFile f = gzopen(path.c_str(), "rb");
  if (f == nullptr) throw IoError("cannot open " + path);
  return GzFile(f);
}

void read_exact(gzFile f, void* buf, std::size_t n, const std::string& path) {
  const int got = gzread(f, buf, static_cast<unsigned>(n));
  if (got < 0) throw IoError("read error in " + path);
  if (static_cast<std::size_t>(got) != n) throw TruncatedFile(path + " is truncated");
}

std::uint32_t read_be32(gzFile f, const std::string& path) {
  unsigned char b[4];
  read_exact(f, b, 4, path);
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
         std::uint32_t(b[3]);
}

void expect_magic(gzFile f, std::uint32_t magic, const std::string& path) {
  const std::uint32_t got = read_be32(f, path);
  if (got != magic) {
    char msg[64];
    std::snprintf(msg, sizeof msg, "bad magic 0x%08x, expected 0x%08x", got, magic);
    throw BadMagic(path + ": " + msg);
  }
}

}  // namespace

ImageSet load_idx(const std::string& images_path, const std::string& labels_path, long limit) {
  GzFile img = open_gz(images_path);
  GzFile lab = open_gz(labels_path);
  expect_magic(img.get(), 0x00000803u, images_path);
  expect_magic(lab.get(), 0x00000801u, labels_path);
  const std::uint32_t count = read_be32(img.get(), images_path);
  const std::uint32_t rows = read_be32(img.get(), images_path);
  const std::uint32_t cols = read_be32(img.get(), images_path);
  const std::uint32_t label_count = read_be32(lab.get(), labels_path);
  if (count != label_count) {
    throw DimensionMismatch(std::to_string(count) + " images but " + std::to_string(label_count) +
                            " labels");
  }

  const std::size_t n = limit >= 0 ? std::min<std::size_t>(count, limit) : count;
  const std::size_t pixels = std::size_t(rows) * cols;
  ImageSet set;
  set.rows = static_cast<int>(rows);
  set.cols = static_cast<int>(cols);
  set.images.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(pixels));
  set.labels.resize(n);

  std::vector<unsigned char> buf(pixels);
  for (std::size_t i = 0; i < n; ++i) {
    read_exact(img.get(), buf.data(), pixels, images_path);
    for (std::size_t j = 0; j < pixels; ++j) set.images(i, j) = buf[j] / 255.0;
  }
  if (n > 0) {
    std::vector<unsigned char> lbuf(n);
    read_exact(lab.get(), lbuf.data(), n, labels_path);
    for (std::size_t i = 0; i < n; ++i) set.labels[i] = lbuf[i];
  }
  return set;
}

std::vector<std::string> column_names(int n, const std::string& prefix) {
  std::vector<std::string> names;
  for (int i = 0; i < n; ++i) names.push_back(prefix + std::to_string(i));
  return names;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Eigen::MatrixXd& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
  out << "\n";
  char buf[32];
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < rows.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", rows(i, j));
      out << (j ? "," : "") << buf;
    }
    out << "\n";
  }
  if (!out) throw IoError("write failed for " + path);
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw IoError(path + " is empty");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) table.header.push_back(cell);
  }
  std::vector<std::vector<double>> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) throw IoError(path + ": malformed number '" + cell + "'");
      row.push_back(v);
    }
    if (row.size() != table.header.size()) {
      throw IoError(path + ": row " + std::to_string(values.size() + 1) + " has " +
                    std::to_string(row.size()) + " fields, header has " +
                    std::to_string(table.header.size()));
    }
    values.push_back(std::move(row));
  }
  table.rows.resize(static_cast<Eigen::Index>(values.size()),
                    static_cast<Eigen::Index>(table.header.size()));
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (std::size_t j = 0; j < values[i].size(); ++j) table.rows(i, j) = values[i][j];
  }
  return table;
}

}  // namespace hee
