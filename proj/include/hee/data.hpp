#pragma once

#include <Eigen/Dense>
#include <string>
#include <string_view>
#include <vector>

#include "hee/rng.hpp"

namespace hee {

enum class Generator { MoG4, Bananas4, Pinwheel };

std::string_view to_string(Generator generator);
/// Accepts "mog4", "bananas4", "pinwheel"; throws ConfigError otherwise.
Generator parse_generator(std::string_view name);

/// n x 2 points with the mixture component that produced each row.
struct Dataset2D {
  Eigen::MatrixXd points;
  std::vector<int> labels;
  Generator generator = Generator::MoG4;
  std::uint64_t seed = 0;
};

/// Equal-weight mixture of N((+-2, +-2), 0.3^2 I). Component k has mean
/// (k & 1 ? 2 : -2, k & 2 ? 2 : -2).
Dataset2D gen_mog4(int n, Rng& rng);

/// Four 90-degree rotations of the banana map
/// b(z) = (z1, z2 + 0.5 z1^2 - 1), z ~ N(0, diag(1, 0.25)), scaled by 0.7 and
/// moved to (0, 2) before rotation. Component k is rotated by k * 90 degrees.
Dataset2D gen_bananas4(int n, Rng& rng);

/// Five-arm pinwheel: radius 2 + 0.3 n1, tangential offset 0.05 n2, arm k
/// rotated by 2 pi k / 5 + 0.3 * radius.
Dataset2D gen_pinwheel(int n, Rng& rng);

Dataset2D generate_dataset(Generator generator, int n, std::uint64_t seed);

constexpr double kMog4Std = 0.3;
/// The four MoG4 component means as rows.
Eigen::MatrixXd mog4_means();
/// Exact mixture log-density.
double mog4_log_density(double x, double y);

/// Grayscale images scaled to [0, 1], one image per row (row-major pixels).
struct ImageSet {
  Eigen::MatrixXd images;
  std::vector<int> labels;
  int rows = 0;
  int cols = 0;
};

/// Reads IDX image/label files (gzip-compressed or raw). `limit` < 0 reads
/// everything. Throws BadMagic, TruncatedFile, DimensionMismatch or IoError.
ImageSet load_idx(const std::string& images_path, const std::string& labels_path, long limit = -1);

/// CSV with a one-line header; numbers printed with 17 significant digits so
/// a write/read round trip is exact.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Eigen::MatrixXd& rows);

struct CsvTable {
  std::vector<std::string> header;
  Eigen::MatrixXd rows;
};

/// Throws IoError on unreadable files and malformed numbers.
CsvTable read_csv(const std::string& path);

/// Header "x0,x1,...".
std::vector<std::string> column_names(int n, const std::string& prefix = "x");

}  // namespace hee
