#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "splitplot/design_gen.hpp"
#include "splitplot/inference.hpp"
#include "splitplot/model_spec.hpp"

namespace splitplot {

/// Shortest decimal text that parses back to exactly the same double
/// (std::to_chars), e.g. 0.1 -> "0.1", 1e-07 -> "1e-07", 24 -> "24".
std::string format_double(double value);

/// Whole-string parse; throws ValidationError mentioning `context`.
double parse_double(std::string_view text, const std::string& context = "number");
std::uint64_t parse_uint(std::string_view text, const std::string& context = "integer");

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column position, or npos.
  std::size_t column(const std::string& name) const;
};

/// Comma-separated, first line is the header. Fields may be double-quoted
/// ("" escapes a quote). Every row must have as many fields as the header.
CsvTable parse_csv(std::string_view text);
/// Quotes a field only if it contains a comma, quote or line break.
std::string csv_field(const std::string& value);
std::string format_csv(const CsvTable& table);

/// Model declaration file:
///
///   # comment
///   factor <name> continuous <low> <high> hard|easy
///   factor <name> categorical <label>,<label>[,...] hard|easy
///   terms mains_and_all_2fi
///   terms mains_only
///   terms explicit <a> <b> <a*b> ...
///
/// Factors keep declaration order. Exactly one `terms` line is required.
ModelSpec parse_model_file(std::string_view text);
std::string format_model_file(const ModelSpec& model);

/// Design CSV: run_id,whole_plot,<factor columns>[,<response columns>].
/// Factor values are natural units (continuous) or level labels
/// (categorical); run_id and whole_plot are 1-based.
std::string write_design_csv(const Design& design,
                             const std::vector<std::pair<std::string, Eigen::VectorXd>>& responses = {});
std::string write_design_csv(const ResponseTable& table);

/// Parses a design CSV against the model's factors. Rows are ordered by
/// run_id, which must be exactly 1..n. Whole plots must be 1..r and each
/// must occupy consecutive run_ids. Columns other than run_id, whole_plot
/// and the factors are read as numeric responses.
ResponseTable read_design_csv(std::string_view text, const ModelSpec& model);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace splitplot
