#ifndef MOT_INSTANCE_IO_HPP
#define MOT_INSTANCE_IO_HPP

#include "mot/cascade.hpp"
#include "mot/cost.hpp"
#include "mot/coupling.hpp"
#include "mot/dual_optimizer.hpp"
#include "mot/envelope.hpp"
#include "mot/measures.hpp"
#include "mot/primal.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mot {

/// Settings an instance file may carry; command-line flags override them.
struct InstanceOptions {
  std::optional<Variant> variant;
  std::optional<double> tol;
  std::optional<int> max_iters;
  std::optional<Eigen::Index> max_variables;
  std::optional<Eigen::Index> max_tableau_entries;
};

/// A parsed instance file:
///
///   {
///     "marginals": [ {"atoms": [...], "weights": [...]},
///                    {"lognormal": {"location": l, "scale": s, "m": 15}} ],
///     "cost": {"name": "basket", "strike": 1.0}
///           | {"name": "constant", "value": 0.0}
///           | {"table": [...]}            row-major, last coordinate fastest
///           | {"table_csv": "cost.csv"}   rows x_1,...,x_n,value
///     "options": {"variant": "proposition", "tol": 1e-4, "max_iters": 5000,
///                 "max_variables": 200000, "max_tableau_entries": 60000000}
///   }
struct InstanceFile {
  MarginalSequence marginals;
  CostSpec cost;
  InstanceOptions options;
};

/// Parses instance JSON. Relative CSV paths resolve against `base_dir`.
/// Throws ParseError naming the field (or line and column for bad JSON).
/// Marginal sequences are not checked for convex order here.
InstanceFile parse_instance(std::string_view text, const std::filesystem::path& base_dir = {});
InstanceFile load_instance(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// {"variant": ..., "dual_value": ..., "u": [{"grid": [...], "values": [...]}, ...]}
std::string certificate_to_json(const DualCertificate& cert);
DualCertificate certificate_from_json(std::string_view text);

/// One row x_1,...,x_n,q per path of positive mass.
std::string coupling_to_csv(const Coupling& q, const MarginalSequence& ms);

/// iter,dual_value,best_value,grad_norm,elapsed_ms
std::string trace_to_csv(const AscentTrace& trace);

/// Two-column x,f table; a non-numeric first line is taken as a header.
/// Throws ParseError on malformed rows and InvalidArgument when x is not
/// strictly increasing.
GridFunction<double> envelope_input_from_csv(std::string_view text);
/// x,value rows for the hull knots.
std::string envelope_to_csv(const EnvelopeResult<double>& e);

/// Atom,weight rows.
std::string measure_to_csv(const DiscreteMeasure& mu);

}  // namespace mot

#endif  // MOT_INSTANCE_IO_HPP
