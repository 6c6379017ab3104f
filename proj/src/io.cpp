#include "splitplot/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "splitplot/errors.hpp"

namespace splitplot {

std::string format_double(double value) {
  if (value == 0.0) return "0";  // also folds -0
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, const std::string& context) {
  double v = 0.0;
  const auto* b = text.data();
  const auto* e = b + text.size();
  if (!text.empty() && *b == '+') ++b;
  const auto res = std::from_chars(b, e, v);
  if (text.empty() || res.ec != std::errc() || res.ptr != e || !std::isfinite(v)) {
    throw ValidationError(context + ": cannot parse '" + std::string(text) + "' as a number");
  }
  return v;
}

std::uint64_t parse_uint(std::string_view text, const std::string& context) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ValidationError(context + ": cannot parse '" + std::string(text) + "' as an integer");
  }
  return v;
}

std::size_t CsvTable::column(const std::string& name) const {
  auto it = std::find(header.begin(), header.end(), name);
  return it == header.end() ? std::string::npos : static_cast<std::size_t>(it - header.begin());
}

CsvTable parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> rec;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t i = 0;
  if (text.substr(0, 3) == "\xEF\xBB\xBF") i = 3;

  auto end_field = [&] {
    rec.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    if (!(rec.size() == 1 && rec[0].empty())) records.push_back(std::move(rec));
    rec.clear();
  };

  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n') {
      end_record();
    } else if (c == '\r') {
      // CRLF line endings
    } else {
      field += c;
      field_started = true;
    }
  }
  if (quoted) throw ValidationError("csv: unterminated quoted field");
  if (!field.empty() || !rec.empty()) end_record();
  if (records.empty()) throw ValidationError("csv: missing header row");

  CsvTable t;
  t.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != t.header.size()) {
      throw ValidationError("csv: row " + std::to_string(r) + " has " +
                            std::to_string(records[r].size()) + " fields, header has " +
                            std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(records[r]));
  }
  return t;
}

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\r\n") == std::string::npos) return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string format_csv(const CsvTable& table) {
  std::string out;
  auto line = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ',';
      out += csv_field(fields[i]);
    }
    out += '\n';
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
  return out;
}

namespace {

std::vector<std::string> tokens(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(',', start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

bool parse_hard_flag(const std::string& s, const std::string& where) {
  if (s == "hard") return true;
  if (s == "easy") return false;
  throw ValidationError(where + ": expected 'hard' or 'easy', got '" + s + "'");
}

}  // namespace

ModelSpec parse_model_file(std::string_view text) {
  std::vector<Factor> factors;
  std::optional<std::variant<TermPolicy, ExplicitTerms>> policy;

  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto tok = tokens(line);
    if (tok.empty()) continue;
    const auto where = "model file line " + std::to_string(line_no);

    if (tok[0] == "factor") {
      if (tok.size() < 4) throw ValidationError(where + ": incomplete factor declaration");
      const auto& name = tok[1];
      if (tok[2] == "continuous") {
        if (tok.size() != 6) {
          throw ValidationError(where + ": expected 'factor <name> continuous <low> <high> hard|easy'");
        }
        factors.push_back(define_factor(name, parse_double(tok[3], where), parse_double(tok[4], where),
                                        parse_hard_flag(tok[5], where)));
      } else if (tok[2] == "categorical") {
        if (tok.size() != 5) {
          throw ValidationError(where + ": expected 'factor <name> categorical <a>,<b>,... hard|easy'");
        }
        factors.push_back(define_factor(name, FactorKind::Categorical, split_commas(tok[3]),
                                        parse_hard_flag(tok[4], where)));
      } else {
        throw ValidationError(where + ": unknown factor kind '" + tok[2] + "'");
      }
    } else if (tok[0] == "terms") {
      if (policy) throw ValidationError(where + ": duplicate terms line");
      if (tok.size() < 2) throw ValidationError(where + ": missing term policy");
      if (tok[1] == "mains_and_all_2fi" && tok.size() == 2) {
        policy = TermPolicy::MainsAndAll2fi;
      } else if (tok[1] == "mains_only" && tok.size() == 2) {
        policy = TermPolicy::MainsOnly;
      } else if (tok[1] == "explicit" && tok.size() > 2) {
        ExplicitTerms terms;
        for (std::size_t k = 2; k < tok.size(); ++k) {
          std::vector<std::string> names;
          std::size_t start = 0;
          while (true) {
            const auto pos = tok[k].find('*', start);
            names.push_back(tok[k].substr(start, pos - start));
            if (pos == std::string::npos) break;
            start = pos + 1;
          }
          terms.push_back(std::move(names));
        }
        policy = std::move(terms);
      } else {
        throw ValidationError(where + ": unknown term policy");
      }
    } else {
      throw ValidationError(where + ": unknown directive '" + tok[0] + "'");
    }
  }
  if (factors.empty()) throw ValidationError("model file declares no factors");
  if (!policy) throw ValidationError("model file has no terms line");
  return build_model(std::move(factors), *policy);
}

std::string format_model_file(const ModelSpec& model) {
  std::string out;
  for (const auto& f : model.factors) {
    out += "factor " + f.name + " ";
    if (f.kind == FactorKind::Continuous) {
      out += "continuous " + format_double(f.low) + " " + format_double(f.high);
    } else {
      out += "categorical ";
      for (std::size_t i = 0; i < f.levels.size(); ++i) out += (i ? "," : "") + f.levels[i];
    }
    out += f.hard_to_change ? " hard\n" : " easy\n";
  }
  out += "terms explicit";
  for (const auto& t : model.terms) out += " " + model.term_label(t);
  out += "\n";
  return out;
}

namespace {

std::string natural_text(const Factor& f, double coded) {
  if (f.kind == FactorKind::Categorical) return f.levels.at(static_cast<std::size_t>(coded));
  return format_double(f.to_natural(coded));
}

/// Coded value whose natural-unit rendering reproduces `natural` exactly, so
/// that read -> write does not drift in the last bit.
double coded_from_natural(const Factor& f, double natural) {
  const double c = f.to_coded(natural);
  if (f.to_natural(c) == natural) return c;
  double up = c;
  double down = c;
  for (int k = 0; k < 8; ++k) {
    up = std::nextafter(up, HUGE_VAL);
    if (f.to_natural(up) == natural) return up;
    down = std::nextafter(down, -HUGE_VAL);
    if (f.to_natural(down) == natural) return down;
  }
  return c;
}

}  // namespace

std::string write_design_csv(const Design& design,
                             const std::vector<std::pair<std::string, Eigen::VectorXd>>& responses) {
  CsvTable t;
  t.header = {"run_id", "whole_plot"};
  for (const auto& f : design.factors) t.header.push_back(f.name);
  for (const auto& r : responses) t.header.push_back(r.first);
  for (std::size_t j = 0; j < design.runs.size(); ++j) {
    const auto& run = design.runs[j];
    std::vector<std::string> row{std::to_string(j + 1), std::to_string(run.whole_plot + 1)};
    for (std::size_t f = 0; f < design.factors.size(); ++f) {
      row.push_back(natural_text(design.factors[f], run.settings[f]));
    }
    for (const auto& r : responses) row.push_back(format_double(r.second(static_cast<Eigen::Index>(j))));
    t.rows.push_back(std::move(row));
  }
  return format_csv(t);
}

std::string write_design_csv(const ResponseTable& table) {
  return write_design_csv(table.design, table.responses);
}

ResponseTable read_design_csv(std::string_view text, const ModelSpec& model) {
  const auto t = parse_csv(text);
  const auto run_col = t.column("run_id");
  const auto wp_col = t.column("whole_plot");
  if (run_col == std::string::npos) throw ValidationError("design csv: missing run_id column");
  if (wp_col == std::string::npos) throw ValidationError("design csv: missing whole_plot column");
  std::vector<std::size_t> factor_cols;
  for (const auto& f : model.factors) {
    const auto c = t.column(f.name);
    if (c == std::string::npos) throw ValidationError("design csv: missing factor column '" + f.name + "'");
    factor_cols.push_back(c);
  }
  std::vector<std::size_t> response_cols;
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (c == run_col || c == wp_col) continue;
    if (std::find(factor_cols.begin(), factor_cols.end(), c) != factor_cols.end()) continue;
    if (t.header[c].empty()) throw ValidationError("design csv: empty column name");
    if (std::count(t.header.begin(), t.header.end(), t.header[c]) > 1) {
      throw ValidationError("design csv: duplicate column '" + t.header[c] + "'");
    }
    response_cols.push_back(c);
  }

  const auto n = t.rows.size();
  if (n == 0) throw ValidationError("design csv: no runs");
  std::vector<const std::vector<std::string>*> by_run(n, nullptr);
  for (std::size_t r = 0; r < n; ++r) {
    const auto& row = t.rows[r];
    const auto id = parse_uint(row[run_col], "design csv row " + std::to_string(r + 1) + " run_id");
    if (id < 1 || id > n) {
      throw ValidationError("design csv: run_id values must be exactly 1.." + std::to_string(n));
    }
    if (by_run[id - 1]) throw ValidationError("design csv: duplicate run_id " + std::to_string(id));
    by_run[id - 1] = &row;
  }

  ResponseTable table;
  table.design.factors = model.factors;
  std::map<std::size_t, std::size_t> last_seen;
  std::vector<Eigen::VectorXd> resp(response_cols.size(), Eigen::VectorXd(static_cast<Eigen::Index>(n)));
  for (std::size_t j = 0; j < n; ++j) {
    const auto& row = *by_run[j];
    const auto where = "design csv run " + std::to_string(j + 1);
    const auto wp = parse_uint(row[wp_col], where + " whole_plot");
    if (wp < 1) throw ValidationError(where + ": whole_plot must be >= 1");
    if (auto it = last_seen.find(wp); it != last_seen.end() && it->second != j - 1) {
      throw ValidationError(where + ": whole plot " + std::to_string(wp) +
                            " is split into non-consecutive runs");
    }
    last_seen[wp] = j;

    Run run;
    run.whole_plot = wp - 1;
    for (std::size_t f = 0; f < model.factors.size(); ++f) {
      const auto& factor = model.factors[f];
      const auto& cell = row[factor_cols[f]];
      if (factor.kind == FactorKind::Categorical) {
        const auto lvl = factor.level_index(cell);
        if (!lvl) throw ValidationError(where + ": '" + cell + "' is not a level of '" + factor.name + "'");
        run.settings.push_back(static_cast<double>(*lvl));
      } else {
        const double v = parse_double(cell, where + " " + factor.name);
        if (v < factor.low || v > factor.high) {
          throw ValidationError(where + ": " + factor.name + " = " + cell + " outside [" +
                                format_double(factor.low) + ", " + format_double(factor.high) + "]");
        }
        run.settings.push_back(std::clamp(coded_from_natural(factor, v), -1.0, 1.0));
      }
    }
    table.design.runs.push_back(std::move(run));
    table.whole_plot.push_back(wp - 1);
    for (std::size_t k = 0; k < response_cols.size(); ++k) {
      resp[k](static_cast<Eigen::Index>(j)) = parse_double(row[response_cols[k]], where + " " + t.header[response_cols[k]]);
    }
  }
  if (last_seen.size() != last_seen.rbegin()->first) {
    throw ValidationError("design csv: whole_plot values must cover 1.." + std::to_string(last_seen.size()));
  }
  for (std::size_t k = 0; k < response_cols.size(); ++k) {
    table.responses.emplace_back(t.header[response_cols[k]], std::move(resp[k]));
  }
  table.validate();
  return table;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw ValidationError("failed writing '" + path + "'");
}

}  // namespace splitplot
