#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ccop/json_io.hpp"
#include "ccop/problem.hpp"

namespace ccop {

/// Invalid instance file; the message names the offending field.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kSchemaVersion = 1;

/// 0.5 x'Qx + c'x + constant
struct QuadraticForm {
  Matrix Q;
  Vector c;
  double constant = 0.0;
};

enum class RowKind { Ineq, Eq };

/// 0.5 x'Qx + a'x + b (<= or =) 0. Q is empty for affine rows.
struct ConstraintRow {
  RowKind kind = RowKind::Ineq;
  bool quadratic = false;
  Matrix Q;
  Vector a;
  double b = 0.0;
};

struct ObjectiveSpec {
  bool builtin = false;
  QuadraticForm quad;           // when !builtin
  std::string builtin_name;     // "rosenbrock" | "least_squares"
  json_io::ordered_json params; // builtin parameters
};

struct GeneratorInfo {
  std::string type;  // "portfolio" | "sparse_lsq"
  std::uint64_t seed = 0;
  json_io::ordered_json dims;
  json_io::ordered_json params;
};

struct InstanceSpec {
  int schema_version = kSchemaVersion;
  std::string name;
  int n = 0;
  int m = 0;
  int p = 0;
  int kappa = 0;
  ObjectiveSpec objective;
  std::vector<ConstraintRow> constraints;
  bool level_bounded = false;
  std::optional<GeneratorInfo> generator;
  std::vector<std::string> warnings;  // load-time notes, not serialized
};

/// Validates and converts a parsed document. Asymmetric Q blocks are
/// symmetrized (with a warning) when the asymmetry exceeds 1e-12.
InstanceSpec parse_instance(const json_io::ordered_json& doc);
InstanceSpec read_instance_file(const std::filesystem::path& path);

json_io::ordered_json to_json(const InstanceSpec& spec);
std::string serialize_instance(const InstanceSpec& spec);
void write_instance_file(const InstanceSpec& spec, const std::filesystem::path& path);

/// Re-checks the dimensional invariants, including 0 < kappa < n.
void validate_instance(const InstanceSpec& spec);

/// Callbacks with exact derivatives synthesized from the quadratic/affine data.
CcopProblem build_problem(const InstanceSpec& spec);

/// A path as given, or a bundled instance name such as "example_3_1".
std::filesystem::path resolve_instance_path(std::string_view name_or_path);
CcopProblem load_instance(std::string_view name_or_path);

struct PortfolioParams {
  double jitter = 1e-2;     // diagonal regularization scale
  double mu_low = 0.0;      // expected returns ~ U(mu_low, mu_high)
  double mu_high = 0.2;
  double upper = 0.0;       // per-asset upper bound; <= 0 means none
};

/// min x'Sigma x s.t. e'x = 1, x >= 0, mu'x >= r, with
/// Sigma = A A'/n + diag(jitter (1 + u_i)), A standard normal, mu uniform,
/// and r the median of mu. Deterministic per seed.
InstanceSpec generate_portfolio(std::uint64_t seed, int n, int kappa,
                                const PortfolioParams& params = {});

struct SparseLsqParams {
  int rows = 0;             // observations; 0 means 2n
  double noise = 1e-2;
};

/// min 0.5 ||A x - b||^2 with b generated from a kappa-sparse ground truth.
InstanceSpec generate_sparse_lsq(std::uint64_t seed, int n, int kappa,
                                 const SparseLsqParams& params = {});

}  // namespace ccop
