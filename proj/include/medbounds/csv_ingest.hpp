#pragma once

#include "medbounds/categorical.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace medbounds {

/// Which CSV columns play which role. C and R may span several columns.
struct ColumnRoles {
    std::vector<std::string> covariates;
    std::string exposure;
    std::vector<std::string> confounders;
    std::string mediator;
    std::string outcome;
    std::optional<std::string> weight;
};

struct IngestConfig {
    ColumnRoles roles;
    /// Empty labels are filled from the observed exposure levels when there are exactly two.
    std::string baseline_label;
    std::string comparison_label;
    /// Explicit level orderings by column name. Columns without one get their
    /// observed labels, sorted numerically when all parse as numbers and
    /// lexicographically otherwise.
    std::map<std::string, std::vector<std::string>> levels;
    /// Outcome support. Cells are matched by numeric value. Empty means the
    /// sorted distinct observed values.
    std::vector<double> y_values;
};

/// Checks role coverage and that no column has two roles. Throws Config.
void validate_roles(const ColumnRoles& roles);

Dataset read_csv_dataset(std::istream& in, const IngestConfig& config);
Dataset load_csv_dataset(const std::string& path, const IngestConfig& config);

/// Header plus one row per record, columns named after the codecs; weights are
/// written as a "weight" column when any differs from 1.
void write_csv_dataset(std::ostream& out, const Dataset& data);

/// Role config matching the column names write_csv_dataset uses.
IngestConfig ingest_config_for(const DatasetCodecs& codecs);

/// Splits one CSV line; handles double-quoted fields with "" escapes.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace medbounds
