#include "thermodiffuse/tensor_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <utility>

#include "json.hpp"

#include "thermodiffuse/errors.hpp"

namespace fs = std::filesystem;

namespace tdiff {

namespace {

constexpr char kMagic[4] = {'T', 'D', 'I', 'F'};
constexpr std::size_t kHeaderBytes = 14;

void put_bytes(std::vector<unsigned char>& buf, std::uint64_t value, int n_bytes) {
  for (int i = 0; i < n_bytes; ++i) buf.push_back(static_cast<unsigned char>(value >> (8 * i)));
}

std::uint64_t get_bytes(const std::vector<unsigned char>& buf, std::size_t offset, int n_bytes) {
  std::uint64_t value = 0;
  for (int i = 0; i < n_bytes; ++i) {
    value |= static_cast<std::uint64_t>(buf[offset + i]) << (8 * i);
  }
  return value;
}

}  // namespace

void write_matrix(const Matrix& m, const std::string& path) {
  if (!m.all_finite()) {
    throw ContractViolation("write_matrix: matrix contains non-finite values");
  }
  std::vector<unsigned char> buf;
  buf.reserve(kHeaderBytes + 8 * m.rows() * m.cols());
  for (char c : kMagic) buf.push_back(static_cast<unsigned char>(c));
  put_bytes(buf, kTensorFileVersion, 2);
  put_bytes(buf, m.rows(), 4);
  put_bytes(buf, m.cols(), 4);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      put_bytes(buf, std::bit_cast<std::uint64_t>(m(i, j)), 8);
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("write_matrix: cannot open " + path);
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write_matrix: write failed for " + path);
}

Matrix read_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("read_matrix: cannot open " + path);
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  if (buf.size() < 4 || buf[0] != 'T' || buf[1] != 'D' || buf[2] != 'I' || buf[3] != 'F') {
    throw BadMagic("read_matrix: " + path + " is not a tensor file (bad magic)");
  }
  if (buf.size() < 6) throw TruncatedPayload("read_matrix: " + path + " ends inside the header");
  const auto version = static_cast<std::uint16_t>(get_bytes(buf, 4, 2));
  if (version != kTensorFileVersion) {
    throw VersionMismatch("read_matrix: " + path + " has version " + std::to_string(version) +
                          ", expected " + std::to_string(kTensorFileVersion));
  }
  if (buf.size() < kHeaderBytes) {
    throw TruncatedPayload("read_matrix: " + path + " ends inside the header");
  }
  const auto rows = static_cast<std::size_t>(get_bytes(buf, 6, 4));
  const auto cols = static_cast<std::size_t>(get_bytes(buf, 10, 4));
  const std::size_t expected = kHeaderBytes + 8 * rows * cols;
  if (buf.size() < expected) {
    throw TruncatedPayload("read_matrix: " + path + " holds " +
                           std::to_string(buf.size() - kHeaderBytes) + " payload bytes, header " +
                           "declares " + std::to_string(8 * rows * cols));
  }
  if (buf.size() > expected) {
    throw IoError("read_matrix: " + path + " has trailing bytes past the declared payload");
  }
  Vector data(rows * cols);
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = std::bit_cast<double>(get_bytes(buf, kHeaderBytes + 8 * i, 8));
    if (!std::isfinite(data[i])) {
      throw ContractViolation("read_matrix: " + path + " contains non-finite values");
    }
  }
  return Matrix(rows, cols, std::move(data));
}

std::vector<ManifestEntry> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("read_manifest: cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("read_manifest: " + path + " is not valid JSON: " + e.what());
  }
  if (!doc.is_array()) throw IoError("read_manifest: " + path + " must hold a JSON array");
  std::vector<ManifestEntry> entries;
  for (const auto& item : doc) {
    if (!item.is_object() || !item.contains("role") || !item.contains("path") ||
        !item.contains("rows") || !item.contains("cols") || !item["role"].is_string() ||
        !item["path"].is_string() || !item["rows"].is_number_unsigned() ||
        !item["cols"].is_number_unsigned()) {
      throw IoError("read_manifest: " + path +
                    " entries need string role/path and unsigned rows/cols");
    }
    entries.push_back({item["role"].get<std::string>(), item["path"].get<std::string>(),
                       item["rows"].get<std::size_t>(), item["cols"].get<std::size_t>()});
  }
  return entries;
}

void write_manifest(const std::vector<ManifestEntry>& entries, const std::string& path) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& e : entries) {
    doc.push_back({{"role", e.role}, {"path", e.path}, {"rows", e.rows}, {"cols", e.cols}});
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("write_manifest: cannot open " + path);
  out << doc.dump(2) << "\n";
  if (!out) throw IoError("write_manifest: write failed for " + path);
}

namespace {

std::string resolve(const std::string& manifest_path, const std::string& entry_path) {
  fs::path p(entry_path);
  if (p.is_absolute()) return entry_path;
  return (fs::path(manifest_path).parent_path() / p).string();
}

Matrix read_entry(const std::string& manifest_path, const ManifestEntry& e) {
  Matrix m = read_matrix(resolve(manifest_path, e.path));
  if (m.rows() != e.rows || m.cols() != e.cols) {
    throw ContractViolation("load_ingested: " + e.path + " is " + std::to_string(m.rows()) + "x" +
                            std::to_string(m.cols()) + " but the manifest declares " +
                            std::to_string(e.rows) + "x" + std::to_string(e.cols));
  }
  return m;
}

std::vector<Vector> matrix_rows(const Matrix& m) {
  std::vector<Vector> rows;
  rows.reserve(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) rows.push_back(m.row(i));
  return rows;
}

}  // namespace

IngestedData load_ingested(const std::string& manifest_path) {
  IngestedData data;
  data.activations.provenance = "ingested";
  for (const auto& e : read_manifest(manifest_path)) {
    if (e.role == "w_enc") {
      data.w_enc = read_entry(manifest_path, e);
    } else if (e.role == "w_dec") {
      data.w_dec = read_entry(manifest_path, e);
    } else if (e.role == "x_enc") {
      data.activations.x_enc = matrix_rows(read_entry(manifest_path, e));
    } else if (e.role == "x_dec_target") {
      data.activations.x_dec_target = matrix_rows(read_entry(manifest_path, e));
    }
  }
  if (!data.activations.x_enc.empty() || !data.activations.x_dec_target.empty()) {
    if (data.activations.x_enc.size() != data.activations.x_dec_target.size()) {
      throw ContractViolation("load_ingested: x_enc and x_dec_target sample counts differ");
    }
    const std::size_t d = data.activations.x_enc.front().size();
    for (const auto& v : data.activations.x_dec_target) {
      if (v.size() != d) {
        throw ContractViolation("load_ingested: activation dimensions are not uniform");
      }
    }
  }
  return data;
}

void save_interface(const ConditioningInterface& iface, const std::string& dir) {
  fs::create_directories(dir);
  std::vector<ManifestEntry> entries;
  const auto save_block = [&](const std::string& role, const Matrix& m) {
    const std::string file = role + ".tdif";
    write_matrix(m, (fs::path(dir) / file).string());
    entries.push_back({role, file, m.rows(), m.cols()});
  };
  save_block("w1", iface.w1);
  save_block("w2", iface.w2);
  save_block("t_in", iface.t_in);
  save_block("t_out", iface.t_out);
  if (iface.use_bias) {
    save_block("t_in_bias", Matrix(1, iface.t_in_bias.size(), iface.t_in_bias));
    save_block("t_out_bias", Matrix(1, iface.t_out_bias.size(), iface.t_out_bias));
  }
  write_manifest(entries, (fs::path(dir) / "manifest.json").string());
}

ConditioningInterface load_interface(const std::string& manifest_path) {
  ConditioningInterface iface;
  bool have_in_bias = false, have_out_bias = false;
  for (const auto& e : read_manifest(manifest_path)) {
    if (e.role == "w1") {
      iface.w1 = read_entry(manifest_path, e);
    } else if (e.role == "w2") {
      iface.w2 = read_entry(manifest_path, e);
    } else if (e.role == "t_in") {
      iface.t_in = read_entry(manifest_path, e);
    } else if (e.role == "t_out") {
      iface.t_out = read_entry(manifest_path, e);
    } else if (e.role == "t_in_bias") {
      iface.t_in_bias = read_entry(manifest_path, e).row(0);
      have_in_bias = true;
    } else if (e.role == "t_out_bias") {
      iface.t_out_bias = read_entry(manifest_path, e).row(0);
      have_out_bias = true;
    }
  }
  const std::size_t k = iface.w1.rows();
  const std::size_t d = iface.w1.cols();
  if (k == 0 || d == 0 || iface.w2.rows() != d || iface.w2.cols() != k ||
      iface.t_in.rows() != kTransferHidden || iface.t_in.cols() != d ||
      iface.t_out.rows() != d || iface.t_out.cols() != kTransferHidden ||
      have_in_bias != have_out_bias ||
      (have_in_bias &&
       (iface.t_in_bias.size() != kTransferHidden || iface.t_out_bias.size() != d))) {
    throw ContractViolation("load_interface: " + manifest_path +
                            " does not describe a consistent interface");
  }
  iface.use_bias = have_in_bias;
  return iface;
}

}  // namespace tdiff
