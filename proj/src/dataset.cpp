#include "randef/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <istream>
#include <ostream>
#include <sstream>

#include "randef/errors.hpp"
#include "randef/io.hpp"

namespace randef {

bool Box::contains(std::span<const double> x) const noexcept {
  return std::all_of(x.begin(), x.end(), [&](double v) { return v >= lower && v <= upper; });
}

void Box::clamp(std::span<double> x) const noexcept {
  for (double& v : x) v = std::clamp(v, lower, upper);
}

namespace {

void validate(const DatasetSpec& spec) {
  if (spec.classCount < 2) throw ConfigError("dataset needs at least two classes");
  if (spec.inputDim == 0) throw ConfigError("dataset input dimension must be positive");
  if (spec.sampleCount < spec.classCount) {
    throw ConfigError("sample count must be at least the class count");
  }
  if (!(spec.bounds.lower < spec.bounds.upper)) throw ConfigError("bounds need lower < upper");
  if (!(spec.spread >= 0.0) || !std::isfinite(spec.spread)) {
    throw ConfigError("spread must be finite and non-negative");
  }
}

LabeledSet generateBlobs(const DatasetSpec& spec) {
  const auto means = blobMeans(spec);
  Engine engine(deriveSeed(spec.seed, "blob-samples"));
  std::normal_distribution<double> noise(0.0, 1.0);
  LabeledSet out;
  out.reserve(spec.sampleCount);
  for (std::size_t s = 0; s < spec.sampleCount; ++s) {
    Example ex;
    ex.label = s % spec.classCount;
    ex.input = means[ex.label];
    for (double& v : ex.input) v += spec.spread * noise(engine);
    spec.bounds.clamp(ex.input);
    out.push_back(std::move(ex));
  }
  return out;
}

LabeledSet generateRings(const DatasetSpec& spec) {
  Engine engine(deriveSeed(spec.seed, "ring-samples"));
  std::normal_distribution<double> noise(0.0, 1.0);
  const double center = 0.5 * (spec.bounds.lower + spec.bounds.upper);
  const double maxRadius = 0.45 * spec.bounds.range();
  LabeledSet out;
  out.reserve(spec.sampleCount);
  for (std::size_t s = 0; s < spec.sampleCount; ++s) {
    Example ex;
    ex.label = s % spec.classCount;
    Vector dir(spec.inputDim);
    double norm = 0.0;
    do {
      for (double& v : dir) v = noise(engine);
      norm = std::sqrt(std::inner_product(dir.begin(), dir.end(), dir.begin(), 0.0));
    } while (norm == 0.0);
    const double radius = maxRadius * static_cast<double>(ex.label + 1) /
                              static_cast<double>(spec.classCount) +
                          spec.spread * noise(engine);
    ex.input.resize(spec.inputDim);
    for (std::size_t k = 0; k < spec.inputDim; ++k) ex.input[k] = center + radius * dir[k] / norm;
    spec.bounds.clamp(ex.input);
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace

std::vector<Vector> blobMeans(const DatasetSpec& spec) {
  Engine engine(deriveSeed(spec.layoutSeed, "blob-means"));
  const double margin = 0.25 * spec.bounds.range();
  std::uniform_real_distribution<double> coord(spec.bounds.lower + margin,
                                               spec.bounds.upper - margin);
  std::vector<Vector> means(spec.classCount, Vector(spec.inputDim));
  for (auto& m : means) {
    for (double& v : m) v = coord(engine);
  }
  return means;
}

LabeledSet generate(const DatasetSpec& spec) {
  if (spec.kind == DatasetKind::File) return loadFile(spec.path);
  validate(spec);
  return spec.kind == DatasetKind::SyntheticBlobs ? generateBlobs(spec) : generateRings(spec);
}

// ------------------------------------------------------------ vector files

VectorFile benignFile(const LabeledSet& data) {
  VectorFile file;
  file.dim = data.empty() ? 0 : data.front().input.size();
  file.records.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    file.records.push_back({i, "benign", true, data[i].label, 0.0, 0.0, data[i].input});
  }
  return file;
}

LabeledSet toLabeledSet(const VectorFile& file) {
  LabeledSet out;
  for (const auto& r : file.records) {
    if (r.success) out.push_back({r.payload, r.label});
  }
  return out;
}

namespace {
constexpr std::string_view kVectorMagic = "RANDEF-VECTORS";
constexpr std::string_view kColumns = "id,method,success,label,l2,linf,payload";
}  // namespace

void writeVectorFile(std::ostream& out, const VectorFile& file) {
  out << kVectorMagic << ' ' << kVectorFormatVersion << '\n';
  out << "dim " << file.dim << '\n';
  out << "count " << file.records.size() << '\n';
  out << kColumns << '\n';
  std::string line;
  for (const auto& r : file.records) {
    line.clear();
    line += std::to_string(r.id);
    line += ',';
    line += r.method;
    line += ',';
    line += r.success ? '1' : '0';
    line += ',';
    line += std::to_string(r.label);
    line += ',';
    line += io::formatDouble(r.l2);
    line += ',';
    line += io::formatDouble(r.linf);
    line += ',';
    for (std::size_t k = 0; k < r.payload.size(); ++k) {
      if (k) line += ' ';
      line += io::formatDouble(r.payload[k]);
    }
    line += '\n';
    out << line;
  }
}

VectorFile readVectorFile(std::istream& in) {
  std::string line;
  std::size_t lineNo = 0;
  auto next = [&](const char* what) {
    if (!std::getline(in, line)) throw ParseError(std::string("truncated file: missing ") + what, lineNo + 1);
    ++lineNo;
    return std::string_view(line);
  };
  auto header = [&](std::string_view key) {
    const std::string_view v = next(key.data());
    if (v.substr(0, key.size()) != key || v.size() <= key.size() || v[key.size()] != ' ') {
      throw ParseError("expected '" + std::string(key) + " <value>'", lineNo);
    }
    std::uint64_t value = 0;
    if (!io::parseUnsigned(v.substr(key.size() + 1), value)) {
      throw ParseError("bad value for " + std::string(key), lineNo);
    }
    return value;
  };

  VectorFile file;
  const std::uint64_t version = header(kVectorMagic);
  if (version != kVectorFormatVersion) {
    throw ParseError("unsupported vector format version " + std::to_string(version), lineNo);
  }
  file.dim = header("dim");
  const std::uint64_t count = header("count");
  if (io::trim(next("column header")) != kColumns) throw ParseError("unexpected column header", lineNo);

  file.records.reserve(count);
  for (std::uint64_t r = 0; r < count; ++r) {
    const std::string_view row = next("record");
    const auto cols = io::split(row, ',');
    if (cols.size() != 7) throw ParseError("expected 7 columns", lineNo);
    VectorRecord rec;
    std::uint64_t u = 0;
    if (!io::parseUnsigned(cols[0], u)) throw ParseError("bad id", lineNo);
    rec.id = u;
    rec.method = std::string(io::trim(cols[1]));
    if (cols[2] != "0" && cols[2] != "1") throw ParseError("bad success flag", lineNo);
    rec.success = cols[2] == "1";
    if (!io::parseUnsigned(cols[3], u)) throw ParseError("bad label", lineNo);
    rec.label = u;
    if (!io::parseDouble(cols[4], rec.l2) || !io::parseDouble(cols[5], rec.linf)) {
      throw ParseError("bad distortion value", lineNo);
    }
    const std::string_view payload = io::trim(cols[6]);
    if (!payload.empty()) {
      const auto parts = io::split(payload, ' ');
      rec.payload.resize(parts.size());
      for (std::size_t k = 0; k < parts.size(); ++k) {
        if (!io::parseDouble(parts[k], rec.payload[k]) || !std::isfinite(rec.payload[k])) {
          throw ParseError("bad payload element " + std::to_string(k), lineNo);
        }
      }
    }
    if (rec.success && rec.payload.size() != file.dim) {
      throw ParseError("payload has " + std::to_string(rec.payload.size()) + " elements, expected " +
                           std::to_string(file.dim),
                       lineNo);
    }
    file.records.push_back(std::move(rec));
  }
  return file;
}

void saveVectorFile(const std::string& path, const VectorFile& file) {
  std::ostringstream ss;
  writeVectorFile(ss, file);
  io::writeFile(path, ss.str());
}

VectorFile loadVectorFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DependencyError("cannot open vector file " + path);
  return readVectorFile(in);
}

LabeledSet loadFile(const std::string& path) { return toLabeledSet(loadVectorFile(path)); }

}  // namespace randef
