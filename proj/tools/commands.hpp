#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace peer_astab::cli {

// Stable exit codes.
enum Exit : int { certified = 0, negative = 1, input_error = 2, algorithm_failure = 3 };

struct VerifyOptions {
  std::filesystem::path input;  // method file, or a certificate with recheck
  std::string form = "auto";
  std::optional<std::filesystem::path> report;
  bool recheck = false;
};

struct ConstructOptions {
  std::string nodes;  // comma separated
  std::string field = "rational";
  std::string seed_w = "identity";  // or a path
  std::filesystem::path out;
};

struct ReconstructOptions {
  std::filesystem::path input;
  std::optional<double> c1, cs;
  std::optional<std::filesystem::path> out;
};

struct ParallelOptions {
  std::string mode;  // check | nodes
  std::filesystem::path input;
};

struct SampleOptions {
  std::filesystem::path input;
  std::string grid;
  std::optional<std::filesystem::path> csv;
  bool serial = false;
};

// Human-readable summaries go to `out`, diagnostics to `err`.
int cmd_verify(const VerifyOptions& o, std::ostream& out, std::ostream& err);
int cmd_construct(const ConstructOptions& o, std::ostream& out, std::ostream& err);
int cmd_reconstruct(const ReconstructOptions& o, std::ostream& out, std::ostream& err);
int cmd_parallel(const ParallelOptions& o, std::ostream& out, std::ostream& err);
int cmd_sample(const SampleOptions& o, std::ostream& out, std::ostream& err);

}  // namespace peer_astab::cli
