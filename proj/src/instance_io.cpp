#include "mot/instance_io.hpp"

#include "mot/errors.hpp"
#include "mot/product_grid.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace mot {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ParseError(field + ": " + what);
}

const json& require(const json& obj, const std::string& key, const std::string& field) {
  if (!obj.is_object()) fail(field, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) fail(field, "missing field \"" + key + "\"");
  return *it;
}

double number(const json& v, const std::string& field) {
  if (!v.is_number()) fail(field, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(field, "expected a finite number");
  return x;
}

int integer(const json& v, const std::string& field) {
  if (!v.is_number_integer()) fail(field, "expected an integer");
  return v.get<int>();
}

std::vector<double> numbers(const json& v, const std::string& field) {
  if (!v.is_array()) fail(field, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(number(v[i], field + "[" + std::to_string(i) + "]"));
  }
  return out;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // byte offset to line and column
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError("line " + std::to_string(line) + ", column " + std::to_string(column) +
                     ": malformed JSON");
  }
}

DiscreteMeasure parse_marginal(const json& m, const std::string& field) {
  if (!m.is_object()) fail(field, "expected an object");
  if (m.contains("lognormal")) {
    const json& spec = m["lognormal"];
    const std::string f = field + ".lognormal";
    const double location = number(require(spec, "location", f), f + ".location");
    const double scale = number(require(spec, "scale", f), f + ".scale");
    const int count = integer(require(spec, "m", f), f + ".m");
    try {
      return quantize_lognormal(location, scale, count);
    } catch (const InvalidArgument& e) {
      fail(f, e.what());
    }
  }
  const std::vector<double> atoms = numbers(require(m, "atoms", field), field + ".atoms");
  const std::vector<double> weights = numbers(require(m, "weights", field), field + ".weights");
  try {
    return DiscreteMeasure(atoms, weights);
  } catch (const InvalidArgument& e) {
    fail(field, e.what());
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  return cells;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

// Numeric rows of a CSV file, skipping blank lines and a non-numeric header.
std::vector<std::vector<double>> numeric_rows(std::string_view text, std::size_t columns,
                                              const std::string& source) {
  std::vector<std::vector<double>> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    std::vector<double> row(cells.size());
    bool ok = cells.size() == columns;
    for (std::size_t j = 0; ok && j < cells.size(); ++j) ok = parse_double(cells[j], row[j]);
    if (!ok) {
      if (rows.empty() && lineno == 1) continue;  // header
      throw ParseError(source + " line " + std::to_string(lineno) + ": expected " +
                       std::to_string(columns) + " numeric columns");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::Index atom_index(const DiscreteMeasure& mu, double x) {
  const Eigen::VectorXd& atoms = mu.atoms();
  const double span = std::max(1.0, atoms.cwiseAbs().maxCoeff());
  for (Eigen::Index k = 0; k < atoms.size(); ++k) {
    if (std::abs(atoms(k) - x) <= 1e-12 * span) return k;
  }
  return -1;
}

Eigen::VectorXd table_from_csv(std::string_view text, const MarginalSequence& ms,
                               const std::string& source) {
  const ProductGrid grid(ms);
  const auto rows = numeric_rows(text, ms.size() + 1, source);
  Eigen::VectorXd values = Eigen::VectorXd::Constant(grid.paths(), std::nan(""));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    Eigen::Index flat = 0;
    for (std::size_t i = 0; i < ms.size(); ++i) {
      const Eigen::Index k = atom_index(ms[i], rows[r][i]);
      if (k < 0) {
        throw ParseError(source + " row " + std::to_string(r + 1) + ": x_" + std::to_string(i + 1) +
                         " is not an atom of marginal " + std::to_string(i + 1));
      }
      flat = flat * grid.dim(i) + k;
    }
    values(flat) = rows[r][ms.size()];
  }
  for (Eigen::Index p = 0; p < values.size(); ++p) {
    if (std::isnan(values(p))) {
      throw ParseError(source + ": the table does not cover every path of the product grid");
    }
  }
  return values;
}

CostSpec parse_cost(const json& c, const MarginalSequence& ms,
                    const std::filesystem::path& base_dir) {
  const std::string field = "cost";
  if (!c.is_object()) fail(field, "expected an object");
  if (c.contains("table")) {
    const Eigen::VectorXd values = to_vector(numbers(c["table"], field + ".table"));
    const Eigen::Index paths = ProductGrid(ms).paths();
    if (values.size() != paths) {
      fail(field + ".table", "has " + std::to_string(values.size()) + " entries, the grid has " +
                                 std::to_string(paths) + " paths");
    }
    return CostSpec::table(values);
  }
  if (c.contains("table_csv")) {
    if (!c["table_csv"].is_string()) fail(field + ".table_csv", "expected a path");
    std::filesystem::path path = c["table_csv"].get<std::string>();
    if (path.is_relative()) path = base_dir / path;
    return CostSpec::table(table_from_csv(read_text_file(path), ms, path.string()));
  }
  const json& name = require(c, "name", field);
  if (!name.is_string()) fail(field + ".name", "expected a string");
  const auto form = cost_form_from_string(name.get<std::string>());
  if (!form || *form == CostForm::custom_table) {
    fail(field + ".name", "unknown cost form \"" + name.get<std::string>() + "\"");
  }
  switch (*form) {
    case CostForm::squared_increment: return CostSpec::squared_increment();
    case CostForm::abs_increment: return CostSpec::abs_increment();
    case CostForm::terminal_call:
      return CostSpec::terminal_call(number(require(c, "strike", field), field + ".strike"));
    case CostForm::basket:
      return CostSpec::basket(number(require(c, "strike", field), field + ".strike"));
    case CostForm::constant:
      return CostSpec::constant(c.contains("value") ? number(c["value"], field + ".value") : 0.0);
    case CostForm::custom_table: break;
  }
  fail(field, "unsupported cost");
}

InstanceOptions parse_options(const json& o) {
  InstanceOptions out;
  if (!o.is_object()) fail("options", "expected an object");
  for (const auto& [key, value] : o.items()) {
    const std::string field = "options." + key;
    if (key == "variant") {
      if (!value.is_string()) fail(field, "expected a string");
      out.variant = variant_from_string(value.get<std::string>());
      if (!out.variant) fail(field, "unknown variant \"" + value.get<std::string>() + "\"");
    } else if (key == "tol") {
      out.tol = number(value, field);
      if (!(*out.tol > 0.0)) fail(field, "must be positive");
    } else if (key == "max_iters") {
      out.max_iters = integer(value, field);
      if (*out.max_iters < 1) fail(field, "must be positive");
    } else if (key == "max_variables") {
      out.max_variables = integer(value, field);
    } else if (key == "max_tableau_entries") {
      if (!value.is_number_integer()) fail(field, "expected an integer");
      out.max_tableau_entries = value.get<std::int64_t>();
    } else {
      fail(field, "unknown option");
    }
  }
  return out;
}

}  // namespace

InstanceFile parse_instance(std::string_view text, const std::filesystem::path& base_dir) {
  const json doc = parse_json(text);
  if (!doc.is_object()) fail("instance", "expected a JSON object");
  const json& marginals = require(doc, "marginals", "instance");
  if (!marginals.is_array()) fail("marginals", "expected an array");
  if (marginals.size() < 2) fail("marginals", "at least two marginals are required");
  std::vector<DiscreteMeasure> measures;
  for (std::size_t i = 0; i < marginals.size(); ++i) {
    measures.push_back(parse_marginal(marginals[i], "marginals[" + std::to_string(i) + "]"));
  }
  MarginalSequence ms(std::move(measures));
  CostSpec cost = parse_cost(require(doc, "cost", "instance"), ms, base_dir);
  InstanceOptions options;
  if (doc.contains("options")) options = parse_options(doc["options"]);
  for (const auto& [key, value] : doc.items()) {
    if (key != "marginals" && key != "cost" && key != "options") fail(key, "unknown field");
  }
  return {std::move(ms), std::move(cost), options};
}

InstanceFile load_instance(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return parse_instance(text, path.parent_path());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << text;
}

std::string certificate_to_json(const DualCertificate& cert) {
  json doc;
  doc["variant"] = std::string(to_string(cert.variant));
  doc["dual_value"] = cert.dual_value;
  if (cert.gap_vs_primal) doc["gap_vs_primal"] = *cert.gap_vs_primal;
  json u = json::array();
  for (const auto& f : cert.dual_variables.u) {
    u.push_back({{"grid", std::vector<double>(f.grid.data(), f.grid.data() + f.size())},
                 {"values", std::vector<double>(f.values.data(), f.values.data() + f.size())}});
  }
  doc["u"] = std::move(u);
  return doc.dump(2) + "\n";
}

DualCertificate certificate_from_json(std::string_view text) {
  const json doc = parse_json(text);
  DualCertificate cert;
  const json& variant = require(doc, "variant", "certificate");
  if (!variant.is_string()) fail("variant", "expected a string");
  const auto v = variant_from_string(variant.get<std::string>());
  if (!v) fail("variant", "unknown variant \"" + variant.get<std::string>() + "\"");
  cert.variant = *v;
  cert.dual_value = number(require(doc, "dual_value", "certificate"), "dual_value");
  if (doc.contains("gap_vs_primal")) cert.gap_vs_primal = number(doc["gap_vs_primal"], "gap_vs_primal");
  const json& u = require(doc, "u", "certificate");
  if (!u.is_array()) fail("u", "expected an array");
  for (std::size_t k = 0; k < u.size(); ++k) {
    const std::string field = "u[" + std::to_string(k) + "]";
    const auto grid = numbers(require(u[k], "grid", field), field + ".grid");
    const auto values = numbers(require(u[k], "values", field), field + ".values");
    try {
      cert.dual_variables.u.emplace_back(to_vector(grid), to_vector(values));
    } catch (const Error& e) {
      fail(field, e.what());
    }
  }
  return cert;
}

std::string coupling_to_csv(const Coupling& q, const MarginalSequence& ms) {
  const ProductGrid grid(ms);
  if (q.q.size() != grid.paths()) throw ShapeMismatch("coupling does not match the product grid");
  std::ostringstream out;
  out.precision(17);
  for (std::size_t i = 0; i < ms.size(); ++i) out << "x_" << i + 1 << ",";
  out << "q\n";
  std::vector<Eigen::Index> idx;
  for (Eigen::Index p = 0; p < grid.paths(); ++p) {
    if (!(q.q(p) > 0.0)) continue;
    grid.unravel(p, idx);
    for (std::size_t i = 0; i < ms.size(); ++i) out << ms[i].atoms()(idx[i]) << ",";
    out << q.q(p) << "\n";
  }
  return out.str();
}

std::string trace_to_csv(const AscentTrace& trace) {
  std::ostringstream out;
  out.precision(17);
  out << "iter,dual_value,best_value,grad_norm,elapsed_ms\n";
  for (const auto& r : trace.rows) {
    out << r.iter << "," << r.dual_value << "," << r.best_value << "," << r.grad_norm << ","
        << r.elapsed_ms << "\n";
  }
  return out.str();
}

GridFunction<double> envelope_input_from_csv(std::string_view text) {
  const auto rows = numeric_rows(text, 2, "envelope input");
  if (rows.empty()) throw ParseError("envelope input: no data rows");
  Eigen::VectorXd x(static_cast<Eigen::Index>(rows.size()));
  Eigen::VectorXd f(x.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    x(static_cast<Eigen::Index>(r)) = rows[r][0];
    f(static_cast<Eigen::Index>(r)) = rows[r][1];
  }
  return GridFunction<double>(x, f);
}

std::string envelope_to_csv(const EnvelopeResult<double>& e) {
  std::ostringstream out;
  out.precision(17);
  out << "x,value\n";
  for (Eigen::Index k = 0; k < e.size(); ++k) out << e.hull_grid(k) << "," << e.hull_values(k) << "\n";
  return out.str();
}

std::string measure_to_csv(const DiscreteMeasure& mu) {
  std::ostringstream out;
  out.precision(17);
  out << "atom,weight\n";
  for (Eigen::Index k = 0; k < mu.size(); ++k) out << mu.atoms()(k) << "," << mu.weights()(k) << "\n";
  return out.str();
}

}  // namespace mot
