#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>
#include <zlib.h>

#include "dgkip/rng.hpp"

namespace dgkip {

// Labeled data as loaded from disk, before class filtering. Labels keep
// their original class ids (0..9 for the image benchmarks).
struct RawDataset {
  Eigen::MatrixXd inputs;   // n x d, row per sample
  std::vector<int> labels;  // n original class ids

  Eigen::Index size() const { return inputs.rows(); }
  Eigen::Index dim() const { return inputs.cols(); }
};

// Binary-task dataset. Every label is exactly -1 or +1; inputs are finite.
// The same type holds the original set O and synthetic sets S.
struct Dataset {
  Eigen::MatrixXd inputs;     // n x d
  Eigen::VectorXd labels;     // n entries in {-1, +1}
  std::pair<int, int> class_names{+1, -1};  // original ids mapped to +1 / -1

  Eigen::Index size() const { return inputs.rows(); }
  Eigen::Index dim() const { return inputs.cols(); }

  void validate() const {
    if (inputs.rows() < 1 || inputs.cols() < 1)
      throw std::invalid_argument("dataset: need n >= 1 and d >= 1");
    if (labels.size() != inputs.rows())
      throw std::invalid_argument("dataset: label count != row count");
    if (!inputs.allFinite())
      throw std::invalid_argument("dataset: non-finite input entry");
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
      const double y = labels[i];
      if (y != 1.0 && y != -1.0)
        throw std::invalid_argument("dataset: label not in {-1,+1} at row " +
                                    std::to_string(i));
    }
  }
};

// Deterministic split/subsample parameters.
struct SplitSpec {
  double train_fraction = 1.0;  // in (0, 1]
  std::int64_t subsample_n = -1;  // <0: keep all
  std::uint64_t seed = 0;
};

namespace detail {

inline std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  in.seekg(0, std::ios::end);
  const auto len = static_cast<std::size_t>(in.tellg());
  in.seekg(0, std::ios::beg);
  std::vector<std::uint8_t> buf(len);
  if (len > 0) in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(len));
  if (!in) throw std::runtime_error("failed reading file: " + path);
  return buf;
}

inline std::uint32_t read_be_u32(const std::uint8_t* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
         (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

inline void write_le_u32(std::ostream& out, std::uint32_t v) {
  std::uint8_t b[4] = {std::uint8_t(v & 0xff), std::uint8_t((v >> 8) & 0xff),
                       std::uint8_t((v >> 16) & 0xff),
                       std::uint8_t((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t read_le_u32(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) |
         (std::uint32_t(p[2]) << 16) | (std::uint32_t(p[3]) << 24);
}

// f64 little-endian byte image. All supported targets are little-endian
// IEEE-754; the byte-level copy keeps the file format explicit.
inline void write_le_f64(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  for (int i = 0; i < 8; ++i)
    out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

inline double read_le_f64(const std::uint8_t* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= std::uint64_t(p[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// IDX (MNIST / Fashion-MNIST native format, big-endian)
//   images: magic 0x00000803 | count | rows | cols | pixels u8
//   labels: magic 0x00000801 | count | labels u8
// Pixels are scaled by 1/255 into [0,1].
// ---------------------------------------------------------------------------
inline RawDataset load_idx(const std::string& images_path,
                           const std::string& labels_path) {
  const auto img = detail::read_file_bytes(images_path);
  if (img.size() < 16) throw std::runtime_error("truncated IDX image file: " + images_path);
  const std::uint32_t img_magic = detail::read_be_u32(img.data());
  if (img_magic == 2049)
    throw std::runtime_error("wrong magic for images (got a labels file): " + images_path);
  if (img_magic != 2051)
    throw std::runtime_error("bad IDX image magic (expected 2051): " + images_path);
  const std::uint32_t n = detail::read_be_u32(img.data() + 4);
  const std::uint32_t rows = detail::read_be_u32(img.data() + 8);
  const std::uint32_t cols = detail::read_be_u32(img.data() + 12);
  const std::size_t want = 16 + std::size_t(n) * rows * cols;
  if (img.size() < want) throw std::runtime_error("truncated IDX image file: " + images_path);

  const auto lab = detail::read_file_bytes(labels_path);
  if (lab.size() < 8) throw std::runtime_error("truncated IDX label file: " + labels_path);
  const std::uint32_t lab_magic = detail::read_be_u32(lab.data());
  if (lab_magic == 2051)
    throw std::runtime_error("wrong magic for labels (got an images file): " + labels_path);
  if (lab_magic != 2049)
    throw std::runtime_error("bad IDX label magic (expected 2049): " + labels_path);
  const std::uint32_t n_lab = detail::read_be_u32(lab.data() + 4);
  if (lab.size() < 8 + std::size_t(n_lab))
    throw std::runtime_error("truncated IDX label file: " + labels_path);
  if (n != n_lab)
    throw std::runtime_error("count mismatch: " + std::to_string(n) + " images vs " +
                             std::to_string(n_lab) + " labels");

  const std::size_t d = std::size_t(rows) * cols;
  RawDataset ds;
  ds.inputs.resize(n, static_cast<Eigen::Index>(d));
  ds.labels.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint8_t* px = img.data() + 16 + std::size_t(i) * d;
    for (std::size_t j = 0; j < d; ++j)
      ds.inputs(i, static_cast<Eigen::Index>(j)) = px[j] / 255.0;
    ds.labels[i] = lab[8 + i];
  }
  return ds;
}

// ---------------------------------------------------------------------------
// CIFAR-10 binary batches: 3073-byte records (1 label byte + 3072 pixel
// bytes, channel-major R|G|B planes of 32x32).
// ---------------------------------------------------------------------------
inline RawDataset load_cifar10(const std::vector<std::string>& batch_paths) {
  constexpr std::size_t kRecord = 3073;
  constexpr std::size_t kPixels = 3072;
  std::size_t total = 0;
  std::vector<std::vector<std::uint8_t>> bufs;
  bufs.reserve(batch_paths.size());
  for (const auto& p : batch_paths) {
    auto buf = detail::read_file_bytes(p);
    if (buf.size() % kRecord != 0)
      throw std::runtime_error("CIFAR-10 batch size not divisible by 3073: " + p);
    total += buf.size() / kRecord;
    bufs.push_back(std::move(buf));
  }
  if (total == 0) throw std::runtime_error("CIFAR-10: no records");

  RawDataset ds;
  ds.inputs.resize(static_cast<Eigen::Index>(total), kPixels);
  ds.labels.resize(total);
  std::size_t row = 0;
  for (std::size_t b = 0; b < bufs.size(); ++b) {
    const auto& buf = bufs[b];
    for (std::size_t r = 0; r < buf.size() / kRecord; ++r, ++row) {
      const std::uint8_t* rec = buf.data() + r * kRecord;
      if (rec[0] > 9)
        throw std::runtime_error("CIFAR-10 label byte > 9 in " + batch_paths[b]);
      ds.labels[row] = rec[0];
      for (std::size_t j = 0; j < kPixels; ++j)
        ds.inputs(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j)) =
            rec[1 + j] / 255.0;
    }
  }
  return ds;
}

// ---------------------------------------------------------------------------
// CSV fallback for toy data. Header row `label,f0,...,f{d-1}`, one sample
// per line, label column first. Labels are parsed as integers.
// ---------------------------------------------------------------------------
inline RawDataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV: " + path);
  if (line.rfind("label", 0) != 0)
    throw std::runtime_error("CSV header must start with 'label': " + path);

  std::vector<int> labels;
  std::vector<std::vector<double>> rows;
  std::size_t d = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    if (vals.size() < 2) throw std::runtime_error("CSV row with no features: " + path);
    if (d == 0) d = vals.size() - 1;
    if (vals.size() - 1 != d)
      throw std::runtime_error("inconsistent CSV column count: " + path);
    labels.push_back(static_cast<int>(std::llround(vals[0])));
    vals.erase(vals.begin());
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw std::runtime_error("CSV has no data rows: " + path);

  RawDataset ds;
  ds.inputs.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
  ds.labels = std::move(labels);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < d; ++j)
      ds.inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return ds;
}

// Keeps only the two requested classes, in their original order.
// class_a maps to +1, class_b to -1.
inline Dataset binarize(const RawDataset& raw, int class_a, int class_b) {
  if (class_a == class_b)
    throw std::invalid_argument("binarize: classes must differ");
  std::vector<Eigen::Index> keep;
  bool saw_a = false, saw_b = false;
  for (Eigen::Index i = 0; i < raw.size(); ++i) {
    if (raw.labels[static_cast<std::size_t>(i)] == class_a) { keep.push_back(i); saw_a = true; }
    else if (raw.labels[static_cast<std::size_t>(i)] == class_b) { keep.push_back(i); saw_b = true; }
  }
  if (!saw_a)
    throw std::runtime_error("binarize: class " + std::to_string(class_a) + " absent");
  if (!saw_b)
    throw std::runtime_error("binarize: class " + std::to_string(class_b) + " absent");

  Dataset ds;
  ds.class_names = {class_a, class_b};
  ds.inputs.resize(static_cast<Eigen::Index>(keep.size()), raw.dim());
  ds.labels.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    ds.inputs.row(static_cast<Eigen::Index>(k)) = raw.inputs.row(keep[k]);
    ds.labels[static_cast<Eigen::Index>(k)] =
        raw.labels[static_cast<std::size_t>(keep[k])] == class_a ? +1.0 : -1.0;
  }
  ds.validate();
  return ds;
}

// Uniform subsample without replacement, deterministic for a fixed seed.
// Row order follows the original dataset.
inline Dataset subsample(const Dataset& ds, std::size_t n, std::uint64_t seed) {
  if (n >= static_cast<std::size_t>(ds.size())) return ds;
  if (n < 1) throw std::invalid_argument("subsample: need n >= 1");
  Rng rng(seed);
  auto picked = rng.sample_without_replacement(static_cast<std::size_t>(ds.size()), n);
  std::sort(picked.begin(), picked.end());
  Dataset out;
  out.class_names = ds.class_names;
  out.inputs.resize(static_cast<Eigen::Index>(n), ds.dim());
  out.labels.resize(static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) {
    out.inputs.row(static_cast<Eigen::Index>(k)) = ds.inputs.row(static_cast<Eigen::Index>(picked[k]));
    out.labels[static_cast<Eigen::Index>(k)] = ds.labels[static_cast<Eigen::Index>(picked[k])];
  }
  return out;
}

// Seeded train/test split per SplitSpec, then optional train subsampling.
inline std::pair<Dataset, Dataset> split(const Dataset& ds, const SplitSpec& spec) {
  if (spec.train_fraction <= 0.0 || spec.train_fraction > 1.0)
    throw std::invalid_argument("split: train_fraction must be in (0,1]");
  const auto n = static_cast<std::size_t>(ds.size());
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(spec.seed);
  rng.shuffle(idx);
  auto n_train = static_cast<std::size_t>(spec.train_fraction * static_cast<double>(n));
  n_train = std::max<std::size_t>(1, std::min(n_train, n));

  auto take = [&](std::size_t lo, std::size_t hi) {
    std::vector<std::size_t> rows(idx.begin() + static_cast<std::ptrdiff_t>(lo),
                                  idx.begin() + static_cast<std::ptrdiff_t>(hi));
    std::sort(rows.begin(), rows.end());
    Dataset out;
    out.class_names = ds.class_names;
    out.inputs.resize(static_cast<Eigen::Index>(rows.size()), ds.dim());
    out.labels.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
      out.inputs.row(static_cast<Eigen::Index>(k)) = ds.inputs.row(static_cast<Eigen::Index>(rows[k]));
      out.labels[static_cast<Eigen::Index>(k)] = ds.labels[static_cast<Eigen::Index>(rows[k])];
    }
    return out;
  };

  Dataset train = take(0, n_train);
  Dataset test = n_train < n ? take(n_train, n) : Dataset{};
  if (spec.subsample_n > 0 &&
      static_cast<std::size_t>(spec.subsample_n) < static_cast<std::size_t>(train.size()))
    train = subsample(train, static_cast<std::size_t>(spec.subsample_n), spec.seed + 1);
  return {std::move(train), std::move(test)};
}

// Per-feature standardization (off by default in the pipeline; kept behind a
// flag for experiments). Constant features pass through unchanged.
inline void standardize(Dataset& ds) {
  for (Eigen::Index j = 0; j < ds.dim(); ++j) {
    const double mean = ds.inputs.col(j).mean();
    const double var =
        (ds.inputs.col(j).array() - mean).square().sum() / static_cast<double>(ds.size());
    const double sd = std::sqrt(var);
    if (sd > 0) ds.inputs.col(j) = (ds.inputs.col(j).array() - mean) / sd;
  }
}

// ---------------------------------------------------------------------------
// Synthetic dataset file.
//   "DGK1" | u32 n | u32 d | n*d f64 inputs row-major | n i8 labels | CRC32
// All integers and floats little-endian; the CRC covers every byte between
// the magic and the checksum field.
// ---------------------------------------------------------------------------
inline void save_synthetic(const Dataset& ds, const std::string& path) {
  ds.validate();  // refuses n = 0 and non-(+/-)1 labels
  std::string payload;
  payload.reserve(8 + static_cast<std::size_t>(ds.size() * ds.dim()) * 8 +
                  static_cast<std::size_t>(ds.size()));
  {
    std::ostringstream hdr;
    detail::write_le_u32(hdr, static_cast<std::uint32_t>(ds.size()));
    detail::write_le_u32(hdr, static_cast<std::uint32_t>(ds.dim()));
    payload += hdr.str();
  }
  for (Eigen::Index i = 0; i < ds.size(); ++i)
    for (Eigen::Index j = 0; j < ds.dim(); ++j)
      detail::write_le_f64(payload, ds.inputs(i, j));
  for (Eigen::Index i = 0; i < ds.size(); ++i)
    payload.push_back(ds.labels[i] > 0 ? char(1) : char(-1));

  const auto crc = static_cast<std::uint32_t>(
      crc32(crc32(0L, Z_NULL, 0), reinterpret_cast<const Bytef*>(payload.data()),
            static_cast<uInt>(payload.size())));

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write("DGK1", 4);
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  detail::write_le_u32(out, crc);
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline Dataset load_synthetic(const std::string& path) {
  const auto buf = detail::read_file_bytes(path);
  if (buf.size() < 16) throw std::runtime_error("truncated synthetic file: " + path);
  if (std::memcmp(buf.data(), "DGK1", 4) != 0)
    throw std::runtime_error("bad magic (expected DGK1): " + path);
  const std::uint32_t n = detail::read_le_u32(buf.data() + 4);
  const std::uint32_t d = detail::read_le_u32(buf.data() + 8);
  const std::size_t payload_len = 8 + std::size_t(n) * d * 8 + n;
  if (buf.size() != 4 + payload_len + 4)
    throw std::runtime_error("synthetic file size mismatch: " + path);

  const auto crc_stored = detail::read_le_u32(buf.data() + 4 + payload_len);
  const auto crc_actual = static_cast<std::uint32_t>(
      crc32(crc32(0L, Z_NULL, 0), reinterpret_cast<const Bytef*>(buf.data() + 4),
            static_cast<uInt>(payload_len)));
  if (crc_stored != crc_actual)
    throw std::runtime_error("checksum failure: " + path);

  Dataset ds;
  ds.inputs.resize(n, d);
  ds.labels.resize(n);
  const std::uint8_t* p = buf.data() + 12;
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = 0; j < d; ++j, p += 8)
      ds.inputs(i, j) = detail::read_le_f64(p);
  for (std::uint32_t i = 0; i < n; ++i, ++p)
    ds.labels[i] = static_cast<std::int8_t>(*p) > 0 ? +1.0 : -1.0;
  ds.validate();
  return ds;
}

}  // namespace dgkip
