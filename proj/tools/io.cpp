#include "io.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include <openssl/evp.h>

#include "peer_astab/maps.hpp"

#ifndef PEER_ASTAB_VERSION
#define PEER_ASTAB_VERSION "0.0.0"
#endif

namespace peer_astab::io {

namespace {

const json& require(const json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) throw InputError(std::string("missing key '") + key + "'");
  return doc.at(key);
}

std::string scalar_text(const json& v, const char* what) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) {
    std::ostringstream os;
    os << std::setprecision(17) << v.get<double>();
    return os.str();
  }
  throw InputError(std::string(what) + ": scalars must be strings");
}

template <class T, class Parse>
Matrix<T> matrix_from(const json& rows, const char* what, Parse parse) {
  if (!rows.is_array() || rows.empty()) throw InputError(std::string(what) + ": expected a nonempty list of rows");
  const std::size_t r = rows.size();
  if (!rows[0].is_array()) throw InputError(std::string(what) + ": rows must be lists");
  const std::size_t c = rows[0].size();
  Matrix<T> m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    if (!rows[i].is_array() || rows[i].size() != c) throw InputError(std::string(what) + ": ragged rows");
    for (std::size_t j = 0; j < c; ++j) m(i, j) = parse(scalar_text(rows[i][j], what));
  }
  return m;
}

std::string render_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <class T, class Render>
json matrix_to(const Matrix<T>& m, Render render) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(render(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void require_square(std::size_t s, const auto& m, const char* what) {
  if (m.rows() != s || m.cols() != s) throw InputError(std::string(what) + ": expected " + std::to_string(s) + "x" + std::to_string(s));
}

}  // namespace

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

json read_json(const std::filesystem::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

ExactMatrix exact_matrix(const json& rows, const FieldSpec& field, const char* what) {
  try {
    return matrix_from<Scalar>(rows, what, [&](const std::string& s) { return parse_scalar(s, field); });
  } catch (const ParseError& e) {
    throw InputError(std::string(what) + ": " + e.what());
  } catch (const FieldError& e) {
    throw InputError(std::string(what) + ": " + e.what());
  }
}

RealMatrix real_matrix(const json& rows, const char* what) {
  try {
    return matrix_from<double>(rows, what, [](const std::string& s) { return parse_real(s); });
  } catch (const ParseError& e) {
    throw InputError(std::string(what) + ": " + e.what());
  }
}

json to_json(const ExactMatrix& m) { return matrix_to(m, [](const Scalar& x) { return x.str(); }); }
json to_json(const RealMatrix& m) { return matrix_to(m, render_double); }

MethodDocument parse_method(const json& doc) {
  MethodDocument out;
  out.source = doc;
  try {
    out.field = FieldSpec::parse(require(doc, "field").get<std::string>());
  } catch (const std::exception& e) {
    throw InputError(std::string("field: ") + e.what());
  }
  const auto s = require(doc, "s").get<std::size_t>();
  const json& nodes = require(doc, "nodes");
  if (!nodes.is_array() || nodes.size() != s) throw InputError("nodes: expected " + std::to_string(s) + " entries");
  if (s == 0 || s > max_dimension()) throw InputError("s out of range");

  try {
    if (out.field.exact()) {
      std::vector<Scalar> c;
      for (const auto& v : nodes) c.push_back(parse_scalar(scalar_text(v, "nodes"), out.field));
      const NodeSet ns(c);
      const ExactMatrix g = exact_matrix(require(doc, "G"), out.field, "G");
      require_square(s, g, "G");
      PeerMethod m = assemble_order_sm1(ns, g, out.field);
      if (doc.contains("B")) {
        m.B = exact_matrix(doc["B"], out.field, "B");
        require_square(s, m.B, "B");
        m.order_sm1 = order_residual(m).is_zero();
      }
      if (doc.contains("A")) {
        m.A = exact_matrix(doc["A"], out.field, "A");
        require_square(s, m.A, "A");
      }
      if (doc.contains("weights")) {
        const json& w = doc["weights"];
        WeightPair<Scalar> wp{exact_matrix(require(w, "Z"), out.field, "weights.Z"),
                              exact_matrix(require(w, "W"), out.field, "weights.W"),
                              parse_representation(require(w, "representation").get<std::string>())};
        require_square(s, wp.Z, "weights.Z");
        require_square(s, wp.W, "weights.W");
        out.weights = wp;
        out.real_weights = WeightPair<double>{to_real(wp.Z), to_real(wp.W), wp.representation};
      }
      out.real = to_real(m);
      out.exact = std::move(m);
    } else {
      std::vector<double> c;
      for (const auto& v : nodes) c.push_back(parse_real(scalar_text(v, "nodes")));
      const RealNodeSet ns(c);
      const RealMatrix g = real_matrix(require(doc, "G"), "G");
      require_square(s, g, "G");
      RealPeerMethod m = assemble_order_sm1(ns, g, out.field);
      if (doc.contains("B")) {
        m.B = real_matrix(doc["B"], "B");
        require_square(s, m.B, "B");
        m.order_sm1 = false;
      }
      if (doc.contains("A")) {
        m.A = real_matrix(doc["A"], "A");
        require_square(s, m.A, "A");
      }
      if (doc.contains("weights")) {
        const json& w = doc["weights"];
        WeightPair<double> wp{real_matrix(require(w, "Z"), "weights.Z"), real_matrix(require(w, "W"), "weights.W"),
                              parse_representation(require(w, "representation").get<std::string>())};
        require_square(s, wp.Z, "weights.Z");
        require_square(s, wp.W, "weights.W");
        out.real_weights = wp;
      }
      out.real = std::move(m);
    }
  } catch (const InputError&) {
    throw;
  } catch (const json::exception& e) {
    throw InputError(e.what());
  } catch (const ParseError& e) {
    throw InputError(e.what());
  } catch (const FieldError& e) {
    throw InputError(e.what());
  } catch (const SingularMatrixError& e) {
    throw InputError(std::string("singular coefficient matrix: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  return out;
}

MethodDocument load_method(const std::filesystem::path& path) {
  try {
    return parse_method(read_json(path));
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

json method_json(const PeerMethod& m, const std::optional<WeightPair<Scalar>>& w) {
  json doc;
  doc["s"] = m.stages();
  doc["field"] = m.field.str();
  json nodes = json::array();
  for (const auto& c : m.nodes.values()) nodes.push_back(c.str());
  doc["nodes"] = nodes;
  doc["G"] = to_json(m.G);
  doc["B"] = to_json(m.B);
  if (w) doc["weights"] = {{"representation", to_string(w->representation)}, {"Z", to_json(w->Z)}, {"W", to_json(w->W)}};
  return doc;
}

json method_json(const RealPeerMethod& m, const std::optional<WeightPair<double>>& w) {
  json doc;
  doc["s"] = m.stages();
  doc["field"] = FieldSpec::float64().str();
  json nodes = json::array();
  for (double c : m.nodes.values()) nodes.push_back(render_double(c));
  doc["nodes"] = nodes;
  doc["G"] = to_json(m.G);
  doc["B"] = to_json(m.B);
  if (w) doc["weights"] = {{"representation", to_string(w->representation)}, {"Z", to_json(w->Z)}, {"W", to_json(w->W)}};
  return doc;
}

CompactForm parse_compact(const json& doc) {
  try {
    CompactForm cf;
    cf.E = real_matrix(require(doc, "E"), "E");
    if (!cf.E.square()) throw InputError("E must be square");
    const std::size_t s = cf.E.rows();
    if (doc.contains("X")) {
      cf.X = real_matrix(doc["X"], "X");
    } else {
      const RealMatrix slack = real_matrix(require(doc, "slack"), "slack");
      require_square(s, slack, "slack");
      std::map<EntryIndex, double> kernel;
      for (const auto& k : require(doc, "kernel")) {
        const auto i = require(k, "i").get<std::size_t>();
        const auto j = require(k, "j").get<std::size_t>();
        if (i < 1 || j < 1 || i > s || j > s) throw InputError("kernel entry index out of range");
        kernel[{i - 1, j - 1}] = parse_real(scalar_text(require(k, "value"), "kernel"));
      }
      try {
        cf.X = compact_from_slack(cf.E, slack, kernel);
      } catch (const InconsistentSystemError& e) {
        throw InputError(e.what());
      }
    }
    require_square(s, cf.X, "X");
    if (doc.contains("c1")) cf.c1 = parse_real(scalar_text(doc["c1"], "c1"));
    if (doc.contains("cs")) cf.cs = parse_real(scalar_text(doc["cs"], "cs"));
    if (doc.contains("singly_implicit")) cf.singly_implicit = doc["singly_implicit"].get<bool>();
    return cf;
  } catch (const json::exception& e) {
    throw InputError(e.what());
  } catch (const ParseError& e) {
    throw InputError(e.what());
  }
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
    throw std::runtime_error("SHA-256 failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return os.str();
}

std::string document_hash(const json& doc) { return sha256_hex(doc.dump()); }

json certificate_json(const json& input, const TestMatrixReport& r) {
  json cert;
  cert["tool"] = "peer-astab";
  cert["version"] = PEER_ASTAB_VERSION;
  cert["created"] = utc_now();
  cert["input"] = {{"sha256", document_hash(input)}, {"document", input}};
  cert["form"] = to_string(r.form);
  cert["verdict"] = to_string(r.certificate.verdict);
  cert["a_stable"] = r.a_stable;
  cert["rank"] = r.certificate.rank;
  cert["permutation"] = r.certificate.permutation;
  json pivots = json::array();
  for (const auto& p : r.certificate.pivots) pivots.push_back(p.str());
  cert["pivots"] = pivots;
  cert["block_defect"] = r.block_defect;
  cert["z_definiteness"] = to_string(r.z_definiteness);
  cert["w_definiteness"] = to_string(r.w_definiteness);
  cert["order_conditions"] = r.order_conditions;
  if (r.nontrivial_definiteness) cert["nontrivial_definiteness"] = to_string(*r.nontrivial_definiteness);
  if (r.certificate.witness) {
    json wv = json::array();
    for (const auto& x : *r.certificate.witness) wv.push_back(x.str());
    cert["witness"] = wv;
  }
  cert["warnings"] = r.warnings;
  return cert;
}

}  // namespace peer_astab::io
