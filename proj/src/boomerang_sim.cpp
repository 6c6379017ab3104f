#include "splitplot/boomerang_sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "splitplot/errors.hpp"
#include "splitplot/io.hpp"
#include "splitplot/rng.hpp"

namespace splitplot {

namespace {

constexpr std::string_view kDefaultTruth =
#include "default_truth.inc"
    ;

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

void TruthConfig::validate() const {
  if (responses.empty()) throw ValidationError("truth config has no responses");
  std::set<std::string> names;
  for (const auto& r : responses) {
    if (r.name.empty()) throw ValidationError("response name must be nonempty");
    if (!names.insert(r.name).second) throw ValidationError("duplicate response '" + r.name + "'");
    if (!(r.sigma_gamma >= 0.0) || !(r.sigma_epsilon >= 0.0)) {
      throw ValidationError("response '" + r.name + "': standard deviations must be >= 0");
    }
    if (!std::isfinite(r.intercept)) throw ValidationError("response '" + r.name + "': bad intercept");
    for (const auto& t : r.terms) {
      if (t.factors.empty() || t.factors.size() > 2 ||
          (t.factors.size() == 2 && t.factors[0] == t.factors[1])) {
        throw ValidationError("response '" + r.name + "': malformed term");
      }
      if (t.coefficients.empty()) throw ValidationError("response '" + r.name + "': term without coefficients");
    }
  }
}

const ResponseTruth& TruthConfig::response(const std::string& name) const {
  for (const auto& r : responses) {
    if (r.name == name) return r;
  }
  throw ValidationError("unknown response '" + name + "'");
}

TruthConfig parse_truth_config(std::string_view text) {
  TruthConfig cfg;
  std::map<std::string, ResponseTruth> by_name;
  std::vector<std::string> order;
  bool have_responses = false;

  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = line;
    if (const auto hash = sv.find('#'); hash != std::string_view::npos) sv = sv.substr(0, hash);
    sv = trim(sv);
    if (sv.empty()) continue;
    const auto eq = sv.find('=');
    const auto where = "truth config line " + std::to_string(line_no);
    if (eq == std::string_view::npos) throw ValidationError(where + ": expected key = value");
    const std::string key(trim(sv.substr(0, eq)));
    const std::string_view value = trim(sv.substr(eq + 1));

    if (key == "version") {
      cfg.version = static_cast<int>(parse_double(value, where));
    } else if (key == "seed") {
      cfg.seed = parse_uint(value, where);
    } else if (key == "responses") {
      order = split(value, ',');
      for (const auto& n : order) {
        if (n.empty()) throw ValidationError(where + ": empty response name");
        if (by_name.count(n)) throw ValidationError(where + ": duplicate response '" + n + "'");
        by_name[n].name = n;
      }
      have_responses = true;
    } else {
      const auto dot = key.find('.');
      if (dot == std::string::npos || !have_responses) {
        throw ValidationError(where + ": unknown key '" + key + "'");
      }
      const auto resp = key.substr(0, dot);
      auto it = by_name.find(resp);
      if (it == by_name.end()) throw ValidationError(where + ": unknown response '" + resp + "'");
      auto& r = it->second;
      const auto field = key.substr(dot + 1);
      if (field == "intercept") {
        r.intercept = parse_double(value, where);
      } else if (field == "sigma_gamma") {
        r.sigma_gamma = parse_double(value, where);
      } else if (field == "sigma_epsilon") {
        r.sigma_epsilon = parse_double(value, where);
      } else if (field.rfind("term.", 0) == 0) {
        TruthTerm t;
        t.factors = split(field.substr(5), '*');
        for (const auto& v : split(value, ',')) t.coefficients.push_back(parse_double(v, where));
        r.terms.push_back(std::move(t));
      } else {
        throw ValidationError(where + ": unknown key '" + key + "'");
      }
    }
  }
  for (const auto& n : order) cfg.responses.push_back(std::move(by_name[n]));
  cfg.validate();
  return cfg;
}

std::string format_truth_config(const TruthConfig& config) {
  std::ostringstream out;
  out << "version = " << config.version << "\n";
  out << "seed = " << config.seed << "\n";
  out << "responses = ";
  for (std::size_t i = 0; i < config.responses.size(); ++i) {
    out << (i ? ", " : "") << config.responses[i].name;
  }
  out << "\n";
  for (const auto& r : config.responses) {
    out << "\n" << r.name << ".intercept = " << format_double(r.intercept) << "\n";
    out << r.name << ".sigma_gamma = " << format_double(r.sigma_gamma) << "\n";
    out << r.name << ".sigma_epsilon = " << format_double(r.sigma_epsilon) << "\n";
    for (const auto& t : r.terms) {
      out << r.name << ".term.";
      for (std::size_t k = 0; k < t.factors.size(); ++k) out << (k ? "*" : "") << t.factors[k];
      out << " = ";
      for (std::size_t k = 0; k < t.coefficients.size(); ++k) {
        out << (k ? ", " : "") << format_double(t.coefficients[k]);
      }
      out << "\n";
    }
  }
  return out.str();
}

std::string_view default_truth_text() { return kDefaultTruth; }

TruthConfig default_truth() { return parse_truth_config(kDefaultTruth); }

Eigen::VectorXd mean_surface(const Design& design, const ResponseTruth& truth) {
  ExplicitTerms terms;
  for (const auto& t : truth.terms) terms.push_back(t.factors);
  const auto model = build_model(design.factors, terms);

  // build_model reorders terms; map each model term back to its coefficients
  std::vector<double> beta{truth.intercept};
  for (const auto& mt : model.terms) {
    const auto label = model.term_label(mt);
    const TruthTerm* match = nullptr;
    for (const auto& t : truth.terms) {
      std::vector<std::size_t> idx;
      for (const auto& f : t.factors) idx.push_back(model.factor_index(f));
      std::sort(idx.begin(), idx.end());
      if (idx == mt.factors) match = &t;
    }
    if (match->coefficients.size() != model.term_df(mt)) {
      throw ValidationError("response '" + truth.name + "': term '" + label + "' needs " +
                            std::to_string(model.term_df(mt)) + " coefficients");
    }
    beta.insert(beta.end(), match->coefficients.begin(), match->coefficients.end());
  }
  const auto x = expand_model_matrix(design, model);
  const Eigen::Map<const Eigen::VectorXd> b(beta.data(), static_cast<Eigen::Index>(beta.size()));
  return x * b;
}

ResponseTable simulate(const Design& design, const TruthConfig& truth, std::uint64_t seed) {
  truth.validate();
  design.validate();
  ResponseTable table;
  table.design = design;
  for (const auto& run : design.runs) table.whole_plot.push_back(run.whole_plot);

  Engine rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto r = design.n_whole_plots();
  for (const auto& resp : truth.responses) {
    Eigen::VectorXd y = mean_surface(design, resp);
    std::vector<double> gamma(r);
    for (auto& g : gamma) g = resp.sigma_gamma * normal(rng);
    for (std::size_t j = 0; j < design.n_runs(); ++j) {
      const double eps = resp.sigma_epsilon * normal(rng);
      y(static_cast<Eigen::Index>(j)) += gamma[design.runs[j].whole_plot] + eps;
    }
    table.responses.emplace_back(resp.name, std::move(y));
  }
  return table;
}

}  // namespace splitplot
