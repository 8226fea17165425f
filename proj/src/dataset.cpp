#include "fae/dataset.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "fae/errors.hpp"
#include "fae/rng.hpp"

namespace fae {

std::string to_string(ScalingMode mode) {
  switch (mode) {
    case ScalingMode::kNone: return "none";
    case ScalingMode::kMinMax: return "minmax";
    case ScalingMode::kZScore: return "zscore";
  }
  return "none";
}

ScalingMode parse_scaling_mode(const std::string& text) {
  if (text == "none") return ScalingMode::kNone;
  if (text == "minmax") return ScalingMode::kMinMax;
  if (text == "zscore") return ScalingMode::kZScore;
  throw ContractError("unknown scaling mode '" + text + "' (expected none|minmax|zscore)");
}

Matrix FeatureScaler::apply(const Matrix& x) const {
  if (mode == ScalingMode::kNone) return x;
  if (x.cols() != offset.size()) throw ContractError("scaler: feature count mismatch");
  Matrix out = x;
  out.rowwise() -= offset.transpose();
  out = out * factor.asDiagonal();
  return out;
}

FeatureScaler fit_minmax(const Matrix& train) {
  if (train.rows() < 1) throw ContractError("fit_minmax: no rows");
  FeatureScaler s;
  s.mode = ScalingMode::kMinMax;
  s.offset = train.colwise().minCoeff().transpose();
  const Vector range = train.colwise().maxCoeff().transpose() - s.offset;
  s.factor = range.unaryExpr([](double r) { return r > 0.0 ? 1.0 / r : 0.0; });
  return s;
}

FeatureScaler fit_zscore(const Matrix& train) {
  if (train.rows() < 1) throw ContractError("fit_zscore: no rows");
  FeatureScaler s;
  s.mode = ScalingMode::kZScore;
  s.offset = train.colwise().mean().transpose();
  const Matrix centered = train.rowwise() - s.offset.transpose();
  const Vector sd =
      (centered.colwise().squaredNorm().transpose() / static_cast<double>(train.rows())).cwiseSqrt();
  s.factor = sd.unaryExpr([](double v) { return v > 0.0 ? 1.0 / v : 0.0; });
  return s;
}

Dataset Dataset::subset(const std::vector<Index>& rows) const {
  Dataset out;
  out.x.resize(static_cast<Index>(rows.size()), x.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] < 0 || rows[r] >= x.rows()) throw ContractError("subset: row out of range");
    out.x.row(static_cast<Index>(r)) = x.row(rows[r]);
  }
  if (labels) {
    std::vector<int> sub;
    sub.reserve(rows.size());
    for (Index r : rows) sub.push_back((*labels)[static_cast<std::size_t>(r)]);
    out.labels = std::move(sub);
  }
  out.feature_names = feature_names;
  out.provenance = provenance;
  return out;
}

void Dataset::validate() const {
  if (x.rows() < 1 || x.cols() < 1) throw ContractError("dataset: empty matrix");
  if (labels && static_cast<Index>(labels->size()) != x.rows()) {
    throw ContractError("dataset: label count differs from sample count");
  }
}

// --- CSV -----------------------------------------------------------------------

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\"");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\"");
  return s.substr(b, e - b + 1);
}

bool is_missing(const std::string& cell) {
  return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan" || cell == "?";
}

double parse_number(const std::string& cell, std::size_t line) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw ParseError("non-numeric cell '" + cell + "'", line);
  }
  return value;
}

}  // namespace

Dataset load_csv(const std::string& path, bool has_header, const std::optional<ColumnRef>& label_column) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");

  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    for (auto& f : fields) f = trim(f);
    if (has_header && header.empty()) {
      header = std::move(fields);
      continue;
    }
    const std::size_t expected = !header.empty() ? header.size() : (rows.empty() ? fields.size() : rows.front().size());
    if (fields.size() != expected) {
      std::ostringstream msg;
      msg << "ragged row: expected " << expected << " fields, found " << fields.size();
      throw ParseError(msg.str(), line_no);
    }
    rows.push_back(std::move(fields));
    line_numbers.push_back(line_no);
  }
  if (rows.empty()) throw ParseError("no data rows in '" + path + "'", line_no);

  const std::size_t cols = rows.front().size();
  std::optional<std::size_t> label_idx;
  if (label_column) {
    if (const auto* name = std::get_if<std::string>(&*label_column)) {
      for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == *name) label_idx = c;
      }
      if (!label_idx) throw ParseError("label column '" + *name + "' not in header");
    } else {
      const Index idx = std::get<Index>(*label_column);
      const Index signed_cols = static_cast<Index>(cols);
      const Index resolved = idx < 0 ? signed_cols + idx : idx;
      if (resolved < 0 || resolved >= signed_cols) throw ParseError("label column index out of range");
      label_idx = static_cast<std::size_t>(resolved);
    }
  }
  const std::size_t features = cols - (label_idx ? 1 : 0);
  if (features == 0) throw ParseError("no feature columns in '" + path + "'");

  Dataset d;
  d.x.resize(static_cast<Index>(rows.size()), static_cast<Index>(features));
  std::vector<int> labels;
  std::size_t missing = 0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    Index out_c = 0;
    for (std::size_t c = 0; c < cols; ++c) {
      const std::string& cell = rows[r][c];
      if (label_idx && c == *label_idx) {
        const double v = parse_number(cell, line_numbers[r]);
        if (v != std::floor(v) || v < 0) throw ParseError("label must be a non-negative integer", line_numbers[r]);
        labels.push_back(static_cast<int>(v));
        continue;
      }
      if (is_missing(cell)) {
        d.x(static_cast<Index>(r), out_c++) = std::numeric_limits<double>::quiet_NaN();
        ++missing;
      } else {
        d.x(static_cast<Index>(r), out_c++) = parse_number(cell, line_numbers[r]);
      }
    }
  }
  if (label_idx) d.labels = std::move(labels);
  for (std::size_t c = 0; c < cols; ++c) {
    if (label_idx && c == *label_idx) continue;
    d.feature_names.push_back(header.empty() ? "f" + std::to_string(d.feature_names.size()) : header[c]);
  }
  d.provenance.source = path;
  d.provenance.format = "csv";
  d.provenance.missing_cells = missing;
  return d;
}

void write_csv(const std::string& path, const Dataset& d, bool with_header) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'");
  out << std::setprecision(17);
  if (with_header) {
    for (Index c = 0; c < d.features(); ++c) {
      out << (c ? "," : "")
          << (static_cast<std::size_t>(c) < d.feature_names.size() ? d.feature_names[static_cast<std::size_t>(c)]
                                                                    : "f" + std::to_string(c));
    }
    if (d.labels) out << ",label";
    out << '\n';
  }
  for (Index r = 0; r < d.samples(); ++r) {
    for (Index c = 0; c < d.features(); ++c) out << (c ? "," : "") << d.x(r, c);
    if (d.labels) out << ',' << (*d.labels)[static_cast<std::size_t>(r)];
    out << '\n';
  }
  if (!out) throw ParseError("write failed for '" + path + "'");
}

// --- IDX -----------------------------------------------------------------------

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::uint32_t read_be32(std::istream& in, const std::string& path) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4)) throw ParseError("truncated IDX header in '" + path + "'");
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) | b[3];
}

std::ifstream open_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return in;
}

}  // namespace

Dataset load_idx_images(const std::string& images_path) {
  auto in = open_binary(images_path);
  const std::uint32_t magic = read_be32(in, images_path);
  if (magic != kImageMagic) {
    std::ostringstream msg;
    msg << "bad IDX image magic 0x" << std::hex << magic << " in '" << images_path << "'";
    throw ParseError(msg.str());
  }
  const std::uint32_t n = read_be32(in, images_path);
  const std::uint32_t rows = read_be32(in, images_path);
  const std::uint32_t cols = read_be32(in, images_path);
  if (n == 0 || rows == 0 || cols == 0) throw ParseError("IDX image file with zero dimension");
  const std::size_t pixels = std::size_t{rows} * cols;
  std::vector<unsigned char> buf(pixels * n);
  if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()))) {
    throw ParseError("truncated IDX image data in '" + images_path + "'");
  }
  Dataset d;
  d.x.resize(n, static_cast<Index>(pixels));
  for (std::size_t i = 0; i < buf.size(); ++i) d.x.data()[i] = buf[i] / 255.0;
  d.provenance.source = images_path;
  d.provenance.format = "idx";
  d.provenance.normalization = "pixel/255";
  return d;
}

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
  Dataset d = load_idx_images(images_path);
  auto in = open_binary(labels_path);
  const std::uint32_t magic = read_be32(in, labels_path);
  if (magic != kLabelMagic) {
    std::ostringstream msg;
    msg << "bad IDX label magic 0x" << std::hex << magic << " in '" << labels_path << "'";
    throw ParseError(msg.str());
  }
  const std::uint32_t n = read_be32(in, labels_path);
  if (static_cast<Index>(n) != d.samples()) {
    throw ParseError("IDX label count " + std::to_string(n) + " differs from image count " +
                     std::to_string(d.samples()));
  }
  std::vector<unsigned char> buf(n);
  if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()))) {
    throw ParseError("truncated IDX label data in '" + labels_path + "'");
  }
  d.labels = std::vector<int>(buf.begin(), buf.end());
  d.provenance.source += ";" + labels_path;
  return d;
}

// --- preprocessing -------------------------------------------------------------

std::size_t impute_missing(Dataset& d, const std::vector<Index>& fit_rows) {
  std::size_t filled = 0;
  for (Index c = 0; c < d.features(); ++c) {
    double sum = 0.0;
    std::size_t count = 0;
    for (Index r : fit_rows) {
      const double v = d.x(r, c);
      if (!std::isnan(v)) {
        sum += v;
        ++count;
      }
    }
    const double mean = count ? sum / static_cast<double>(count) : 0.0;
    for (Index r = 0; r < d.samples(); ++r) {
      if (std::isnan(d.x(r, c))) {
        d.x(r, c) = mean;
        ++filled;
      }
    }
  }
  return filled;
}

namespace {

void record_scaler(Provenance& p, const FeatureScaler& s) {
  p.normalization = to_string(s.mode);
  p.fit_offset.assign(s.offset.data(), s.offset.data() + s.offset.size());
  p.fit_factor.assign(s.factor.data(), s.factor.data() + s.factor.size());
}

}  // namespace

Dataset normalize_minmax(const Dataset& d) {
  Dataset out = d;
  const FeatureScaler s = fit_minmax(d.x);
  out.x = s.apply(d.x);
  record_scaler(out.provenance, s);
  return out;
}

void SplitSpec::validate() const {
  if (!(train > 0.0 && val > 0.0 && test > 0.0)) throw ContractError("split: every ratio must be > 0");
  if (std::abs(train + val + test - 1.0) > 1e-9) throw ContractError("split: ratios must sum to 1");
}

SplitIndices split_indices(Index n, const SplitSpec& spec) {
  spec.validate();
  // The small epsilon keeps e.g. 100 * 0.08 from flooring to 7.
  const auto n_val = static_cast<Index>(std::floor(static_cast<double>(n) * spec.val + 1e-9));
  const auto n_test = static_cast<Index>(std::floor(static_cast<double>(n) * spec.test + 1e-9));
  const Index n_train = n - n_val - n_test;
  if (n_val < 1 || n_test < 1 || n_train < 1) {
    throw ContractError("split: n=" + std::to_string(n) + " too small for three non-empty splits");
  }
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  SeededRng rng(spec.seed);
  rng.shuffle(order);
  SplitIndices out;
  const auto v_end = order.begin() + n_val;
  const auto t_end = v_end + n_test;
  out.val.assign(order.begin(), v_end);
  out.test.assign(v_end, t_end);
  out.train.assign(t_end, order.end());
  return out;
}

DatasetSplits split(const Dataset& d, const SplitSpec& spec, ScalingMode mode) {
  d.validate();
  const SplitIndices idx = split_indices(d.samples(), spec);
  Dataset working = d;
  const std::size_t filled = impute_missing(working, idx.train);
  working.provenance.missing_cells = filled;

  DatasetSplits out{working.subset(idx.train), working.subset(idx.val), working.subset(idx.test)};
  if (mode != ScalingMode::kNone) {
    const FeatureScaler s = mode == ScalingMode::kMinMax ? fit_minmax(out.train.x) : fit_zscore(out.train.x);
    for (Dataset* part : {&out.train, &out.val, &out.test}) {
      part->x = s.apply(part->x);
      record_scaler(part->provenance, s);
    }
  }
  return out;
}

Dataset synth_blocks(Index n, Index blocks, Index per_block, double noise_std, std::uint64_t seed) {
  if (n < 1 || blocks < 1 || per_block < 1) throw ContractError("synth_blocks: sizes must be >= 1");
  if (noise_std < 0.0) throw ContractError("synth_blocks: noise_std must be >= 0");
  SeededRng rng(seed);
  Dataset d;
  d.x.resize(n, blocks * per_block);
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    double best = -1.0;
    for (Index b = 0; b < blocks; ++b) {
      const double latent = rng.uniform();
      if (latent > best) {
        best = latent;
        labels[static_cast<std::size_t>(i)] = static_cast<int>(b);
      }
      for (Index f = 0; f < per_block; ++f) {
        d.x(i, b * per_block + f) = latent + (noise_std > 0.0 ? noise_std * rng.normal() : 0.0);
      }
    }
  }
  d.labels = std::move(labels);
  for (Index b = 0; b < blocks; ++b) {
    for (Index f = 0; f < per_block; ++f) {
      d.feature_names.push_back("b" + std::to_string(b) + "_" + std::to_string(f));
    }
  }
  std::ostringstream src;
  src << "synth_blocks(n=" << n << ",blocks=" << blocks << ",per_block=" << per_block
      << ",noise_std=" << noise_std << ",seed=" << seed << ")";
  d.provenance.source = src.str();
  d.provenance.format = "synth";
  return d;
}

}  // namespace fae
