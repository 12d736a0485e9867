#pragma once
// Bundled desk-scale datasets and the labeled-vector file format, which is
// shared by benign sets and adversarial sets.

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "randef/rng.hpp"
#include "randef/types.hpp"

namespace randef {

/// Per-channel BGR mean of the ImageNet preprocessing pipeline. Kept for
/// anyone extending the harness to real images; nothing here applies it.
inline constexpr std::array<double, 3> kImageNetMeanBgr{103.939, 116.779, 123.68};

/// Axis-aligned input domain, identical bounds on every coordinate.
struct Box {
  double lower = 0.0;
  double upper = 1.0;

  double range() const noexcept { return upper - lower; }
  bool contains(std::span<const double> x) const noexcept;
  void clamp(std::span<double> x) const noexcept;
};

enum class DatasetKind { SyntheticBlobs, SyntheticRings, File };

struct DatasetSpec {
  DatasetKind kind = DatasetKind::SyntheticBlobs;
  std::size_t classCount = 2;
  std::size_t inputDim = 2;
  std::size_t sampleCount = 100;
  Seed seed = 0;
  Box bounds{};
  /// Per-coordinate standard deviation of blob samples (radial for rings).
  double spread = 0.1;
  /// Class layout (means / ring axes) comes from this seed, so train and
  /// evaluation sets drawn with different `seed` share one distribution.
  Seed layoutSeed = 0;
  std::string path;  // DatasetKind::File
};

/// Deterministic from the spec; labels balanced within +-1; all inputs in bounds.
LabeledSet generate(const DatasetSpec& spec);

/// Class means used by SyntheticBlobs (exposed for oracle tests).
std::vector<Vector> blobMeans(const DatasetSpec& spec);

// ------------------------------------------------------------ vector files

inline constexpr int kVectorFormatVersion = 1;

/// One row of a labeled-vector file. Benign rows use method "benign",
/// success = true and zero distortion. Failed adversarial rows carry an empty
/// payload.
struct VectorRecord {
  std::size_t id = 0;
  std::string method;
  bool success = true;
  Label label = 0;
  double l2 = 0.0;
  double linf = 0.0;
  Vector payload;

  friend bool operator==(const VectorRecord&, const VectorRecord&) = default;
};

struct VectorFile {
  std::size_t dim = 0;
  std::vector<VectorRecord> records;

  friend bool operator==(const VectorFile&, const VectorFile&) = default;
};

VectorFile benignFile(const LabeledSet& data);

/// Successful rows, in file order.
LabeledSet toLabeledSet(const VectorFile& file);

void writeVectorFile(std::ostream& out, const VectorFile& file);
VectorFile readVectorFile(std::istream& in);
void saveVectorFile(const std::string& path, const VectorFile& file);
VectorFile loadVectorFile(const std::string& path);

/// loadVectorFile + toLabeledSet.
LabeledSet loadFile(const std::string& path);

}  // namespace randef
