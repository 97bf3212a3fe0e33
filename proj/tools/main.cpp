#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

using namespace peer_astab::cli;

int main(int argc, char** argv) {
  CLI::App app{"Exact A-stability certificates for peer two-step methods"};
  app.require_subcommand(1);

  VerifyOptions verify;
  auto* v = app.add_subcommand("verify", "certify a method file with weights");
  v->add_option("input", verify.input, "method file, or certificate with --recheck")->required();
  v->add_option("--form", verify.form, "auto|original|hat|nordsieck")
      ->check(CLI::IsMember({"auto", "original", "hat", "nordsieck"}));
  v->add_option("--report", verify.report, "write a certificate file");
  v->add_flag("--recheck", verify.recheck, "re-derive the pivots of a certificate");

  ConstructOptions construct;
  auto* c = app.add_subcommand("construct", "build an A-stable method from nodes and a PD seed");
  c->add_option("--nodes", construct.nodes, "comma separated nodes")->required();
  c->add_option("--field", construct.field, "rational or quadratic(d)");
  c->add_option("--seed-W", construct.seed_w, "'identity' or a JSON matrix file");
  c->add_option("--out", construct.out, "method file to write")->required();

  ReconstructOptions reconstruct;
  auto* r = app.add_subcommand("reconstruct", "diagonally implicit method from a compact form");
  r->add_option("input", reconstruct.input, "compact form file")->required();
  r->add_option("--c1", reconstruct.c1, "first node");
  r->add_option("--cs", reconstruct.cs, "last node");
  r->add_option("--out", reconstruct.out, "method file to write");

  ParallelOptions parallel;
  auto* p = app.add_subcommand("parallel", "commutator rank test and node recovery for Gtilde");
  p->add_option("mode", parallel.mode, "check|nodes")->required()->check(CLI::IsMember({"check", "nodes"}));
  p->add_option("input", parallel.input, "matrix file")->required();

  SampleOptions sample;
  auto* s = app.add_subcommand("sample", "spectral radius of M(z) over a grid in the left half plane");
  s->add_option("input", sample.input, "method file")->required();
  s->add_option("--grid", sample.grid, "re=a:b:n,im=c:d:m,boundary=k,origin=0|1");
  s->add_option("--csv", sample.csv, "write re_z,im_z,spectral_radius");
  s->add_flag("--serial", sample.serial, "single-threaded evaluation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : input_error;
  }

  if (*v) return cmd_verify(verify, std::cout, std::cerr);
  if (*c) return cmd_construct(construct, std::cout, std::cerr);
  if (*r) return cmd_reconstruct(reconstruct, std::cout, std::cerr);
  if (*p) return cmd_parallel(parallel, std::cout, std::cerr);
  return cmd_sample(sample, std::cout, std::cerr);
}
