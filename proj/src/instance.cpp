#include "ccop/instance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <random>
#include <sstream>
#include <tuple>

namespace ccop {
namespace {

// Parsed as ordered_json so generator metadata keeps its key order on a
// read/write round trip.
using json = json_io::ordered_json;
using ordered_json = json_io::ordered_json;

constexpr double kSymmetryTol = 1e-12;

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw SchemaError(field + ": " + what);
}

const json& require(const json& doc, const std::string& key, const std::string& path) {
  if (!doc.is_object() || !doc.contains(key)) fail(path + key, "missing required field");
  return doc.at(key);
}

int require_int(const json& doc, const std::string& key, const std::string& path) {
  const json& v = require(doc, key, path);
  if (!v.is_number_integer()) fail(path + key, "expected an integer");
  return v.get<int>();
}

double read_double(const json& v, const std::string& field) {
  try {
    return json_io::to_double(v, field);
  } catch (const std::invalid_argument& e) {
    throw SchemaError(e.what());
  }
}

Vector read_vector(const json& v, const std::string& field, int expected) {
  Vector out;
  try {
    out = json_io::to_vector(v, field);
  } catch (const std::invalid_argument& e) {
    throw SchemaError(e.what());
  }
  if (out.size() != expected) {
    fail(field, "expected " + std::to_string(expected) + " entries, got " + std::to_string(out.size()));
  }
  if (!out.allFinite()) fail(field, "entries must be finite");
  return out;
}

Matrix read_square(const json& v, const std::string& field, int n, std::vector<std::string>& warnings) {
  const Vector flat = read_vector(v, field, n * n);
  Matrix Q(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) Q(r, c) = flat[r * n + c];
  }
  const double asym = (Q - Q.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTol) {
    std::ostringstream msg;
    msg << field << ": asymmetry " << asym << " exceeds " << kSymmetryTol << "; symmetrized";
    warnings.push_back(msg.str());
    Q = 0.5 * (Q + Q.transpose()).eval();
  }
  return Q;
}

double rosenbrock(const Vector& x) {
  double f = 0.0;
  for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
    const double a = x[i + 1] - x[i] * x[i];
    const double b = 1.0 - x[i];
    f += 100.0 * a * a + b * b;
  }
  return f;
}

Vector rosenbrock_grad(const Vector& x) {
  Vector g = Vector::Zero(x.size());
  for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
    const double a = x[i + 1] - x[i] * x[i];
    g[i] += -400.0 * x[i] * a - 2.0 * (1.0 - x[i]);
    g[i + 1] += 200.0 * a;
  }
  return g;
}

struct LeastSquaresData {
  Matrix A;
  Vector b;
};

LeastSquaresData read_least_squares(const json& params, int n) {
  const std::string path = "objective.params.";
  const int rows = require_int(params, "rows", path);
  if (rows < 1) fail(path + "rows", "must be positive");
  const Vector flat = read_vector(require(params, "A", path), path + "A", rows * n);
  LeastSquaresData d;
  d.A.resize(rows, n);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < n; ++c) d.A(r, c) = flat[r * n + c];
  }
  d.b = read_vector(require(params, "b", path), path + "b", rows);
  return d;
}

ordered_json generator_json(const GeneratorInfo& g) {
  ordered_json j;
  j["type"] = g.type;
  j["seed"] = g.seed;
  j["dims"] = g.dims;
  j["params"] = g.params;
  return j;
}

}  // namespace

void validate_instance(const InstanceSpec& spec) {
  if (spec.schema_version != kSchemaVersion) {
    fail("schema_version", "unsupported version " + std::to_string(spec.schema_version));
  }
  if (spec.n < 1) fail("n", "must be positive");
  if (spec.kappa <= 0 || spec.kappa >= spec.n) {
    fail("kappa", "must satisfy 0 < kappa < n (got kappa = " + std::to_string(spec.kappa) +
                      ", n = " + std::to_string(spec.n) + ")");
  }
  const auto ineq = std::count_if(spec.constraints.begin(), spec.constraints.end(),
                                  [](const ConstraintRow& r) { return r.kind == RowKind::Ineq; });
  const auto eq = static_cast<long>(spec.constraints.size()) - ineq;
  if (ineq != spec.m) fail("m", "declares " + std::to_string(spec.m) + " inequality rows, found " + std::to_string(ineq));
  if (eq != spec.p) fail("p", "declares " + std::to_string(spec.p) + " equality rows, found " + std::to_string(eq));
  if (spec.objective.builtin) {
    if (spec.objective.builtin_name == "rosenbrock") {
      if (spec.n < 2) fail("objective.name", "rosenbrock needs n >= 2");
    } else if (spec.objective.builtin_name == "least_squares") {
      read_least_squares(spec.objective.params, spec.n);
    } else {
      fail("objective.name", "unknown builtin '" + spec.objective.builtin_name + "'");
    }
  } else {
    if (spec.objective.quad.Q.rows() != spec.n || spec.objective.quad.Q.cols() != spec.n ||
        spec.objective.quad.c.size() != spec.n) {
      fail("objective", "quadratic form does not match n");
    }
  }
  for (std::size_t i = 0; i < spec.constraints.size(); ++i) {
    const auto& r = spec.constraints[i];
    const std::string f = "constraints[" + std::to_string(i) + "]";
    if (r.a.size() != spec.n) fail(f + ".a", "expected n entries");
    if (r.quadratic && (r.Q.rows() != spec.n || r.Q.cols() != spec.n)) fail(f + ".Q", "expected n*n entries");
  }
}

InstanceSpec parse_instance(const json& doc) {
  if (!doc.is_object()) fail("<root>", "expected a JSON object");
  InstanceSpec spec;
  spec.schema_version = require_int(doc, "schema_version", "");
  if (spec.schema_version != kSchemaVersion) {
    fail("schema_version", "unsupported version " + std::to_string(spec.schema_version));
  }
  const json& name = require(doc, "name", "");
  if (!name.is_string()) fail("name", "expected a string");
  spec.name = name.get<std::string>();
  spec.n = require_int(doc, "n", "");
  spec.m = require_int(doc, "m", "");
  spec.p = require_int(doc, "p", "");
  spec.kappa = require_int(doc, "kappa", "");
  if (spec.n < 1) fail("n", "must be positive");
  if (spec.m < 0) fail("m", "must be >= 0");
  if (spec.p < 0) fail("p", "must be >= 0");
  if (spec.kappa <= 0 || spec.kappa >= spec.n) {
    fail("kappa", "must satisfy 0 < kappa < n (got kappa = " + std::to_string(spec.kappa) +
                      ", n = " + std::to_string(spec.n) + ")");
  }

  const json& obj = require(doc, "objective", "");
  const json& type = require(obj, "type", "objective.");
  if (type == "quadratic") {
    spec.objective.quad.Q = read_square(require(obj, "Q", "objective."), "objective.Q", spec.n, spec.warnings);
    spec.objective.quad.c = read_vector(require(obj, "c", "objective."), "objective.c", spec.n);
    spec.objective.quad.constant = obj.contains("const") ? read_double(obj.at("const"), "objective.const") : 0.0;
  } else if (type == "builtin") {
    spec.objective.builtin = true;
    const json& bname = require(obj, "name", "objective.");
    if (!bname.is_string()) fail("objective.name", "expected a string");
    spec.objective.builtin_name = bname.get<std::string>();
    spec.objective.params = obj.contains("params") ? obj.at("params") : json::object();
  } else {
    fail("objective.type", "expected \"quadratic\" or \"builtin\"");
  }

  if (doc.contains("constraints")) {
    const json& rows = doc.at("constraints");
    if (!rows.is_array()) fail("constraints", "expected an array");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const std::string path = "constraints[" + std::to_string(i) + "].";
      const json& row = rows[i];
      ConstraintRow r;
      const json& kind = require(row, "kind", path);
      if (kind == "ineq") {
        r.kind = RowKind::Ineq;
      } else if (kind == "eq") {
        r.kind = RowKind::Eq;
      } else {
        fail(path + "kind", "expected \"ineq\" or \"eq\"");
      }
      const json& form = require(row, "form", path);
      if (form == "quadratic") {
        r.quadratic = true;
        r.Q = read_square(require(row, "Q", path), path + "Q", spec.n, spec.warnings);
      } else if (form != "affine") {
        fail(path + "form", "expected \"affine\" or \"quadratic\"");
      }
      r.a = read_vector(require(row, "a", path), path + "a", spec.n);
      r.b = read_double(require(row, "b", path), path + "b");
      spec.constraints.push_back(std::move(r));
    }
  }

  if (doc.contains("level_bounded")) {
    if (!doc.at("level_bounded").is_boolean()) fail("level_bounded", "expected a boolean");
    spec.level_bounded = doc.at("level_bounded").get<bool>();
  }
  if (doc.contains("generator")) {
    const json& g = doc.at("generator");
    GeneratorInfo info;
    const json& gt = require(g, "type", "generator.");
    if (!gt.is_string()) fail("generator.type", "expected a string");
    info.type = gt.get<std::string>();
    const json& seed = require(g, "seed", "generator.");
    if (!seed.is_number_unsigned() && !seed.is_number_integer()) fail("generator.seed", "expected an integer");
    info.seed = seed.get<std::uint64_t>();
    info.dims = g.contains("dims") ? g.at("dims") : ordered_json::object();
    info.params = g.contains("params") ? g.at("params") : ordered_json::object();
    spec.generator = std::move(info);
  }
  validate_instance(spec);
  return spec;
}

InstanceSpec read_instance_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError(path.string() + ": cannot open file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  try {
    return parse_instance(doc);
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

ordered_json to_json(const InstanceSpec& spec) {
  ordered_json j;
  j["schema_version"] = spec.schema_version;
  j["name"] = spec.name;
  j["n"] = spec.n;
  j["m"] = spec.m;
  j["p"] = spec.p;
  j["kappa"] = spec.kappa;
  ordered_json obj;
  if (spec.objective.builtin) {
    obj["type"] = "builtin";
    obj["name"] = spec.objective.builtin_name;
    obj["params"] = spec.objective.params;
  } else {
    obj["type"] = "quadratic";
    obj["Q"] = json_io::to_json_row_major(spec.objective.quad.Q);
    obj["c"] = json_io::to_json(spec.objective.quad.c);
    obj["const"] = spec.objective.quad.constant;
  }
  j["objective"] = obj;
  ordered_json rows = ordered_json::array();
  for (const auto& r : spec.constraints) {
    ordered_json row;
    row["kind"] = r.kind == RowKind::Ineq ? "ineq" : "eq";
    row["form"] = r.quadratic ? "quadratic" : "affine";
    if (r.quadratic) row["Q"] = json_io::to_json_row_major(r.Q);
    row["a"] = json_io::to_json(r.a);
    row["b"] = r.b;
    rows.push_back(row);
  }
  j["constraints"] = rows;
  j["level_bounded"] = spec.level_bounded;
  if (spec.generator) j["generator"] = generator_json(*spec.generator);
  return j;
}

std::string serialize_instance(const InstanceSpec& spec) {
  return json_io::dump(to_json(spec), 2) + "\n";
}

void write_instance_file(const InstanceSpec& spec, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot write file");
  out << serialize_instance(spec);
}

CcopProblem build_problem(const InstanceSpec& spec) {
  validate_instance(spec);
  const int n = spec.n;
  ProblemFunctions fns;

  if (!spec.objective.builtin) {
    auto q = std::make_shared<const QuadraticForm>(spec.objective.quad);
    fns.f = [q](const Vector& x) { return 0.5 * x.dot(q->Q * x) + q->c.dot(x) + q->constant; };
    fns.grad_f = [q](const Vector& x) -> Vector { return q->Q * x + q->c; };
  } else if (spec.objective.builtin_name == "rosenbrock") {
    fns.f = rosenbrock;
    fns.grad_f = rosenbrock_grad;
  } else {
    auto d = std::make_shared<const LeastSquaresData>(read_least_squares(spec.objective.params, n));
    fns.f = [d](const Vector& x) { return 0.5 * (d->A * x - d->b).squaredNorm(); };
    fns.grad_f = [d](const Vector& x) -> Vector { return d->A.transpose() * (d->A * x - d->b); };
  }

  auto make_block = [n](std::vector<ConstraintRow> rows) {
    auto data = std::make_shared<const std::vector<ConstraintRow>>(std::move(rows));
    auto value = [data](const Vector& x) {
      Vector v(static_cast<Eigen::Index>(data->size()));
      for (std::size_t i = 0; i < data->size(); ++i) {
        const auto& r = (*data)[i];
        double s = r.a.dot(x) + r.b;
        if (r.quadratic) s += 0.5 * x.dot(r.Q * x);
        v[static_cast<Eigen::Index>(i)] = s;
      }
      return v;
    };
    auto jac = [data, n](const Vector& x) {
      Matrix J(n, static_cast<Eigen::Index>(data->size()));
      for (std::size_t i = 0; i < data->size(); ++i) {
        const auto& r = (*data)[i];
        if (r.quadratic) {
          J.col(static_cast<Eigen::Index>(i)) = r.Q * x + r.a;
        } else {
          J.col(static_cast<Eigen::Index>(i)) = r.a;
        }
      }
      return J;
    };
    return std::make_pair(std::function<Vector(const Vector&)>(value),
                          std::function<Matrix(const Vector&)>(jac));
  };

  std::vector<ConstraintRow> ineq;
  std::vector<ConstraintRow> eq;
  for (const auto& r : spec.constraints) (r.kind == RowKind::Ineq ? ineq : eq).push_back(r);
  if (!ineq.empty()) std::tie(fns.g, fns.jac_g) = make_block(std::move(ineq));
  if (!eq.empty()) std::tie(fns.h, fns.jac_h) = make_block(std::move(eq));

  return CcopProblem(spec.name, Dimensions{spec.n, spec.m, spec.p, spec.kappa}, std::move(fns),
                     spec.level_bounded);
}

std::filesystem::path resolve_instance_path(std::string_view name_or_path) {
  const std::filesystem::path direct{std::string(name_or_path)};
  if (std::filesystem::exists(direct)) return direct;
  const std::filesystem::path bundled = std::filesystem::path(CCOP_INSTANCE_DIR);
  for (const auto& candidate : {bundled / direct, bundled / (std::string(name_or_path) + ".json")}) {
    if (std::filesystem::exists(candidate)) return candidate;
  }
  throw SchemaError(std::string(name_or_path) + ": no such file or bundled instance");
}

CcopProblem load_instance(std::string_view name_or_path) {
  return build_problem(read_instance_file(resolve_instance_path(name_or_path)));
}

InstanceSpec generate_portfolio(std::uint64_t seed, int n, int kappa, const PortfolioParams& params) {
  if (n < 3) throw std::invalid_argument("portfolio: n must be >= 3");
  if (kappa < 1 || kappa >= n) throw std::invalid_argument("portfolio: need 1 <= kappa < n");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Matrix A(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) A(r, c) = normal(rng);
  }
  Matrix sigma = A * A.transpose() / static_cast<double>(n);
  sigma = 0.5 * (sigma + sigma.transpose()).eval();
  for (int i = 0; i < n; ++i) sigma(i, i) += params.jitter * (1.0 + unit(rng));

  Vector mu(n);
  for (int i = 0; i < n; ++i) mu[i] = params.mu_low + (params.mu_high - params.mu_low) * unit(rng);
  std::vector<double> sorted(mu.data(), mu.data() + n);
  std::sort(sorted.begin(), sorted.end());
  const double r = n % 2 == 1 ? sorted[static_cast<std::size_t>(n / 2)]
                              : 0.5 * (sorted[static_cast<std::size_t>(n / 2 - 1)] +
                                       sorted[static_cast<std::size_t>(n / 2)]);

  InstanceSpec spec;
  spec.name = "portfolio_seed" + std::to_string(seed) + "_n" + std::to_string(n) + "_k" +
              std::to_string(kappa);
  spec.n = n;
  spec.kappa = kappa;
  // x' Sigma x written as 0.5 x' (2 Sigma) x.
  spec.objective.quad.Q = 2.0 * sigma;
  spec.objective.quad.c = Vector::Zero(n);
  spec.objective.quad.constant = 0.0;

  ConstraintRow budget;
  budget.kind = RowKind::Eq;
  budget.a = Vector::Ones(n);
  budget.b = -1.0;
  spec.constraints.push_back(budget);
  for (int i = 0; i < n; ++i) {
    ConstraintRow lower;
    lower.a = Vector::Zero(n);
    lower.a[i] = -1.0;
    spec.constraints.push_back(lower);
  }
  if (params.upper > 0.0) {
    for (int i = 0; i < n; ++i) {
      ConstraintRow upper;
      upper.a = Vector::Zero(n);
      upper.a[i] = 1.0;
      upper.b = -params.upper;
      spec.constraints.push_back(upper);
    }
  }
  ConstraintRow ret;
  ret.a = -mu;
  ret.b = r;
  spec.constraints.push_back(ret);

  spec.p = 1;
  spec.m = static_cast<int>(spec.constraints.size()) - 1;
  spec.level_bounded = true;

  GeneratorInfo info;
  info.type = "portfolio";
  info.seed = seed;
  info.dims = {{"n", n}, {"kappa", kappa}};
  info.params = {{"jitter", params.jitter}, {"mu_low", params.mu_low},
                 {"mu_high", params.mu_high}, {"upper", params.upper}};
  spec.generator = info;
  validate_instance(spec);
  return spec;
}

InstanceSpec generate_sparse_lsq(std::uint64_t seed, int n, int kappa, const SparseLsqParams& params) {
  if (n < 2) throw std::invalid_argument("sparse_lsq: n must be >= 2");
  if (kappa < 1 || kappa >= n) throw std::invalid_argument("sparse_lsq: need 1 <= kappa < n");
  const int rows = params.rows > 0 ? params.rows : 2 * n;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Matrix A(rows, n);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < n; ++c) A(r, c) = normal(rng) / std::sqrt(static_cast<double>(rows));
  }
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  Vector truth = Vector::Zero(n);
  for (int k = 0; k < kappa; ++k) {
    const double mag = 1.0 + unit(rng);
    truth[idx[static_cast<std::size_t>(k)]] = unit(rng) < 0.5 ? -mag : mag;
  }
  Vector b = A * truth;
  for (int r = 0; r < rows; ++r) b[r] += params.noise * normal(rng);

  InstanceSpec spec;
  spec.name = "sparse_lsq_seed" + std::to_string(seed) + "_n" + std::to_string(n) + "_k" +
              std::to_string(kappa);
  spec.n = n;
  spec.kappa = kappa;
  Matrix Q = A.transpose() * A;
  spec.objective.quad.Q = 0.5 * (Q + Q.transpose());
  spec.objective.quad.c = -A.transpose() * b;
  spec.objective.quad.constant = 0.5 * b.squaredNorm();
  spec.level_bounded = rows >= n;

  GeneratorInfo info;
  info.type = "sparse_lsq";
  info.seed = seed;
  info.dims = {{"n", n}, {"kappa", kappa}, {"rows", rows}};
  info.params = {{"noise", params.noise}, {"truth", json_io::to_json(truth)}};
  spec.generator = info;
  validate_instance(spec);
  return spec;
}

}  // namespace ccop
