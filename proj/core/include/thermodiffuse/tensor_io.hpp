#pragma once

#include <optional>
#include <string>
#include <vector>

#include "thermodiffuse/conditioning.hpp"
#include "thermodiffuse/generators.hpp"
#include "thermodiffuse/matrix.hpp"

namespace tdiff {

// Flat binary tensor file: magic "TDIF", u16 version = 1, u32 rows, u32 cols
// (all little-endian), then rows*cols float64 little-endian row-major.
// File size is always 14 + 8*rows*cols bytes.
inline constexpr std::uint16_t kTensorFileVersion = 1;

Matrix read_matrix(const std::string& path);
void write_matrix(const Matrix& m, const std::string& path);

struct ManifestEntry {
  std::string role;
  std::string path;  // relative to the manifest's directory unless absolute
  std::size_t rows = 0;
  std::size_t cols = 0;
};

std::vector<ManifestEntry> read_manifest(const std::string& path);
void write_manifest(const std::vector<ManifestEntry>& entries, const std::string& path);

// Contents referenced by a manifest. Recognized roles: "w_enc", "w_dec",
// "x_enc", "x_dec_target" (activation files hold one sample per row).
// Unrecognized roles are ignored.
struct IngestedData {
  std::optional<Matrix> w_enc;
  std::optional<Matrix> w_dec;
  ActivationSet activations;
};

IngestedData load_ingested(const std::string& manifest_path);

// One tensor file per weight block plus a manifest.json in dir.
void save_interface(const ConditioningInterface& iface, const std::string& dir);
ConditioningInterface load_interface(const std::string& manifest_path);

}  // namespace tdiff
