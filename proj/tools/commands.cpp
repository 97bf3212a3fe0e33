#include "commands.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "io.hpp"
#include "peer_astab/criterion.hpp"
#include "peer_astab/designer.hpp"
#include "peer_astab/validate.hpp"

namespace peer_astab::cli {

namespace {

using io::json;

constexpr double kSampleBound = 1 + 1e-10;

std::string join(const std::vector<std::string>& parts, const char* sep = ", ") {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

std::vector<std::string> rendered(const std::vector<Scalar>& v) {
  std::vector<std::string> out;
  for (const auto& x : v) out.push_back(x.str());
  return out;
}

WeightPair<Scalar> in_form(const PeerMethod& m, const WeightPair<Scalar>& w, const std::string& form) {
  if (form == "auto") return w;
  return transform_weights(m, w, parse_representation(form));
}

void summarize(const TestMatrixReport& r, std::ostream& out) {
  out << "form " << to_string(r.form) << ": test matrix " << to_string(r.certificate.verdict) << ", rank "
      << r.certificate.rank << " of " << r.matrix.rows();
  if (r.form == Representation::nordsieck) out << ", block defect " << r.block_defect;
  out << "\nZ " << to_string(r.z_definiteness) << ", W " << to_string(r.w_definiteness)
      << (r.order_conditions ? ", order s-1 conditions hold" : "") << '\n';
  if (r.certificate.witness) out << "witness x with x^T M x < 0: (" << join(rendered(*r.certificate.witness)) << ")\n";
  out << (r.a_stable ? "A-stable: certified\n" : "A-stable: not certified\n");
}

// Runs `body`, mapping library exceptions onto exit codes.
template <class Body>
int guarded(std::ostream& err, Body body) {
  try {
    return body();
  } catch (const io::InputError& e) {
    err << "input error: " << e.what() << '\n';
  } catch (const PreconditionError& e) {
    err << "precondition violated: " << e.what() << '\n';
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
  } catch (const FieldError& e) {
    err << "field error: " << e.what() << '\n';
  } catch (const DimensionError& e) {
    err << "dimension error: " << e.what() << '\n';
  } catch (const json::exception& e) {
    err << "input error: " << e.what() << '\n';
  } catch (const ReconstructionError& e) {
    err << "reconstruction failed: " << e.what() << '\n';
    return algorithm_failure;
  } catch (const UnderdeterminedError& e) {
    err << "underdetermined: " << e.what() << '\n';
    return algorithm_failure;
  } catch (const ConvergenceError& e) {
    err << "no convergence: " << e.what() << '\n';
    return algorithm_failure;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << '\n';
  }
  return input_error;
}

int recheck(const VerifyOptions& o, std::ostream& out, std::ostream& err) {
  const json cert = io::read_json(o.input);
  const json& input = cert.at("input");
  const json& doc = input.at("document");
  if (io::document_hash(doc) != input.at("sha256").get<std::string>()) {
    err << "embedded input does not match its recorded hash\n";
    return input_error;
  }
  const auto md = io::parse_method(doc);
  if (!md.exact || !md.weights) throw io::InputError("certificate input lacks an exact method with weights");
  const auto report = certify(*md.exact, in_form(*md.exact, *md.weights, cert.at("form").get<std::string>()));
  const json fresh = io::certificate_json(doc, report);
  bool same = true;
  for (const char* key : {"form", "verdict", "a_stable", "rank", "permutation", "pivots", "block_defect", "witness"}) {
    const bool a = cert.contains(key), b = fresh.contains(key);
    if (a != b || (a && cert.at(key).dump() != fresh.at(key).dump())) {
      err << "recheck mismatch in '" << key << "'\n";
      same = false;
    }
  }
  if (!same) return algorithm_failure;
  out << "recheck: pivots, permutation and verdict reproduced (" << report.certificate.pivots.size()
      << " pivots)\n";
  summarize(report, out);
  return report.a_stable ? certified : negative;
}

}  // namespace

int cmd_verify(const VerifyOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> int {
    if (o.recheck) return recheck(o, out, err);
    const auto md = io::load_method(o.input);
    if (!md.exact) throw io::InputError("verification needs an exact field (rational or quadratic)");
    if (!md.weights) throw io::InputError("method file has no weights");
    if (o.form != "auto") parse_representation(o.form);
    const auto report = certify(*md.exact, in_form(*md.exact, *md.weights, o.form));
    if (o.report) io::write_json(*o.report, io::certificate_json(md.source, report));
    for (const auto& w : report.warnings) err << "warning: " << w << '\n';
    summarize(report, out);
    return report.a_stable ? certified : negative;
  });
}

int cmd_construct(const ConstructOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> int {
    const FieldSpec field = FieldSpec::parse(o.field);
    if (!field.exact()) throw io::InputError("construction needs an exact field");
    std::vector<Scalar> c;
    std::stringstream ss(o.nodes);
    for (std::string item; std::getline(ss, item, ',');) c.push_back(parse_scalar(item, field));
    const NodeSet nodes(c);
    ExactMatrix w0 = ExactMatrix::identity(nodes.size());
    if (o.seed_w != "identity") {
      const json doc = io::read_json(o.seed_w);
      w0 = io::exact_matrix(doc.contains("W") ? doc.at("W") : doc, field, "seed W");
      if (w0.rows() != nodes.size() || !w0.square()) throw io::InputError("seed W has the wrong size");
    }
    const Construction made = construct_general(nodes, w0, field);
    const auto report = certify(made.method, made.weights);
    if (!report.a_stable) {
      err << "self-verification failed for the constructed method\n";
      return algorithm_failure;
    }
    io::write_json(o.out, io::method_json(made.method, made.weights));
    out << "constructed " << nodes.size() << "-stage method, G =\n" << made.method.G << '\n';
    summarize(report, out);
    return certified;
  });
}

int cmd_reconstruct(const ReconstructOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> int {
    CompactForm cf = io::parse_compact(io::read_json(o.input));
    if (o.c1) cf.c1 = *o.c1;
    if (o.cs) cf.cs = *o.cs;
    const Reconstruction r = reconstruct_diag(cf);
    const auto& d = r.diagnostics;
    std::ostringstream nodes;
    nodes << std::setprecision(15);
    for (double c : r.method.nodes.values()) nodes << ' ' << c;
    out << std::setprecision(15) << "eta " << d.eta << " (spread " << d.eta_spread << ")\nnodes" << nodes.str()
        << "\nresiduals: tcf " << d.tcf_residual << ", superdiagonal " << d.superdiagonal_residual << ", nodes "
        << d.node_consistency << ", upper(G) " << d.upper_residual << ", generic " << d.generic_residual << '\n';
    if (o.out) {
      json doc = io::method_json(r.method, r.weights);
      json diag = {{"eta", d.eta},
                   {"eta_spread", d.eta_spread},
                   {"tcf_residual", d.tcf_residual},
                   {"superdiagonal_residual", d.superdiagonal_residual},
                   {"node_consistency", d.node_consistency},
                   {"upper_residual", d.upper_residual},
                   {"generic_residual", d.generic_residual},
                   {"U_H", io::to_json(d.U_H)},
                   {"L_H", io::to_json(d.L_H)}};
      if (d.node_condition) diag["node_condition"] = *d.node_condition;
      doc["diagnostics"] = diag;
      io::write_json(*o.out, doc);
    }
    return certified;
  });
}

int cmd_parallel(const ParallelOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> int {
    if (o.mode != "check" && o.mode != "nodes") throw io::InputError("parallel mode must be 'check' or 'nodes'");
    const json doc = io::read_json(o.input);
    const FieldSpec field = FieldSpec::parse(doc.value("field", std::string("rational")));
    if (!field.exact()) throw io::InputError("parallel checks need an exact field");
    const json& rows = doc.contains("Gtilde") ? doc.at("Gtilde") : doc.at("matrix");
    const ExactMatrix gt = io::exact_matrix(rows, field, "Gtilde");
    if (!gt.square()) throw io::InputError("Gtilde must be square");
    const auto check = parallel_rank_check(gt);
    if (!check.passes) {
      out << "fail: rank " << check.residual_rank << '\n';
      return negative;
    }
    if (check.degenerate) err << "warning: degenerate input, the commutator and last row vanish\n";
    out << "pass: rank " << check.residual_rank << (check.degenerate ? " (degenerate)" : "") << '\n';
    if (o.mode == "check") return certified;

    const NodePolynomial np = recover_node_polynomial(gt);
    out << "node polynomial: x^" << gt.rows();
    for (std::size_t i = np.p.size(); i-- > 0;) {
      if (np.p[i].is_zero()) continue;
      out << " + (" << np.p[i] << ")";
      if (i > 0) out << "*x" << (i > 1 ? "^" + std::to_string(i) : "");
    }
    out << "\nnodes:";
    for (std::size_t k = 0; k < np.roots.size(); ++k) {
      if (np.exact_roots[k]) out << ' ' << *np.exact_roots[k];
      else out << ' ' << std::setprecision(15) << np.roots[k];
    }
    out << '\n';
    if (np.max_imaginary > 1e-8) err << "warning: node polynomial has complex roots (max |Im| " << np.max_imaginary << ")\n";
    return certified;
  });
}

int cmd_sample(const SampleOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> int {
    const SampleGrid grid = SampleGrid::parse(o.grid);
    const auto md = io::load_method(o.input);
    const auto report = sample_spectral_radius(md.real, grid, o.serial ? Execution::serial : Execution::parallel);
    if (o.csv) {
      std::ofstream csv(*o.csv);
      if (!csv) throw io::InputError("cannot write " + o.csv->string());
      write_csv(csv, report.samples);
    }
    const double rho = *report.max_spectral_radius;
    const auto z = *report.argmax_z;
    out << std::setprecision(17) << "max spectral radius " << rho << " at z = " << z.real()
        << (z.imag() < 0 ? " - " : " + ") << std::abs(z.imag()) << "i over " << report.samples.size() << " points";
    if (report.poles_skipped) out << " (" << report.poles_skipped << " poles skipped)";
    out << "\nzero stable: " << (zero_stability(md.real) ? "yes" : "no") << '\n';
    if (md.exact && md.weights && rho > kSampleBound) {
      try {
        if (certify(*md.exact, *md.weights).a_stable)
          err << "INCONSISTENCY: certified A-stable but sampled spectral radius exceeds 1\n";
      } catch (const std::exception&) {
      }
    }
    return rho <= kSampleBound ? certified : negative;
  });
}

}  // namespace peer_astab::cli
