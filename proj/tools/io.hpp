#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "peer_astab/criterion.hpp"
#include "peer_astab/designer.hpp"
#include "peer_astab/peer.hpp"

namespace peer_astab::io {

using nlohmann::json;

/// Malformed document: missing keys, wrong shapes, bad scalars.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_text(const std::filesystem::path& path);
json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const json& doc);

ExactMatrix exact_matrix(const json& rows, const FieldSpec& field, const char* what);
RealMatrix real_matrix(const json& rows, const char* what);
json to_json(const ExactMatrix& m);
json to_json(const RealMatrix& m);

/// A parsed method file. Exact fields fill `exact`; every field fills `real`.
struct MethodDocument {
  json source;
  FieldSpec field;
  std::optional<PeerMethod> exact;
  RealPeerMethod real;
  std::optional<WeightPair<Scalar>> weights;
  std::optional<WeightPair<double>> real_weights;
};

MethodDocument parse_method(const json& doc);
MethodDocument load_method(const std::filesystem::path& path);

json method_json(const PeerMethod& m, const std::optional<WeightPair<Scalar>>& w);
json method_json(const RealPeerMethod& m, const std::optional<WeightPair<double>>& w);

/// Either {"E","X"} or {"E","slack","kernel":[{"i","j","value"}]} (1-based),
/// plus optional "c1", "cs", "singly_implicit". Scalars go through parse_real.
CompactForm parse_compact(const json& doc);

/// Lowercase hex SHA-256 of the compact serialization of `doc`.
std::string sha256_hex(const std::string& bytes);
std::string document_hash(const json& doc);

json certificate_json(const json& input, const TestMatrixReport& report);

}  // namespace peer_astab::io
