#pragma once

// Ordinary least squares with dummy-coded categorical predictors, used to
// explain mean topic-review scores by model settings. Produces the crude
// (one predictor block at a time) and adjusted (all predictors) tables.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>

#include "radlabel/error.hpp"
#include "radlabel/text.hpp"
#include "radlabel/topics.hpp"

namespace radlabel::regress {

struct NumericTerm {
  std::string name;
  std::function<double(const topics::ModelSummary&)> value;
};

/// A categorical predictor; `levels[0]` is the reference level, and each
/// level carries the label it is printed with.
struct FactorTerm {
  std::string name;
  std::vector<std::string> levels;
  std::vector<std::string> display;
  std::function<std::string(const topics::ModelSummary&)> level_of;
};

struct ModelFormula {
  std::string response = "mean score";
  std::function<double(const topics::ModelSummary&)> response_of = [](const auto& s) { return s.mean; };
  std::vector<NumericTerm> numeric;
  std::vector<FactorTerm> factors;
};

/// Mean score on unique labels, scaling factor (reference Large), document
/// type (reference report) and reviewer view (reference both).
inline ModelFormula score_design() {
  ModelFormula formula;
  formula.numeric.push_back({"Unique labels", [](const auto& s) { return static_cast<double>(s.unique_topic_labels); }});
  formula.factors.push_back({"Scaling factor",
                          {"Large", "Normal", "Small", "Tiny"},
                          {"Large (10)", "Normal (1)", "Small (.1)", "Tiny (.01)"},
                          [](const auto& s) { return s.scaling_level; }});
  formula.factors.push_back({"Document type",
                          {"report", "sentences"},
                          {"Report", "Sentences"},
                          [](const auto& s) { return std::string(topics::to_string(s.document_type)); }});
  formula.factors.push_back({"View",
                          {"both", "docs", "words"},
                          {"Both", "Documents", "Words"},
                          [](const auto& s) { return std::string(topics::to_string(s.view_mode)); }});
  return formula;
}

struct Design {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::vector<std::string> columns;  // "Intercept", numeric names, "Factor:level"
};

/// Intercept column, then numeric terms, then (levels - 1) indicators per factor.
inline Design encode_design(const std::vector<topics::ModelSummary>& rows, const ModelFormula& formula) {
  Design d;
  d.columns.push_back("Intercept");
  for (const auto& t : formula.numeric) d.columns.push_back(t.name);
  for (const auto& f : formula.factors) {
    if (f.levels.size() < 2) throw ValidationError("factor '" + f.name + "' needs at least two levels");
    for (std::size_t l = 1; l < f.levels.size(); ++l) d.columns.push_back(f.name + ":" + f.levels[l]);
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto p = static_cast<Eigen::Index>(d.columns.size());
  if (n <= p)
    throw ValidationError("regression needs more rows than coefficients (n=" + std::to_string(n) +
                          ", p=" + std::to_string(p) + ")");
  d.X = Eigen::MatrixXd::Zero(n, p);
  d.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    d.y(i) = formula.response_of(r);
    Eigen::Index c = 0;
    d.X(i, c++) = 1.0;
    for (const auto& t : formula.numeric) d.X(i, c++) = t.value(r);
    for (const auto& f : formula.factors) {
      const std::string level = f.level_of(r);
      std::size_t found = f.levels.size();
      for (std::size_t l = 0; l < f.levels.size(); ++l)
        if (f.levels[l] == level) found = l;
      if (found == f.levels.size())
        throw DataError("row " + std::to_string(i + 1) + ": unknown level '" + level + "' for factor '" + f.name + "'");
      for (std::size_t l = 1; l < f.levels.size(); ++l) d.X(i, c++) = found == l ? 1.0 : 0.0;
    }
  }
  return d;
}

struct Coefficient {
  std::string term;
  double estimate = 0.0;
  double std_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct OlsFit {
  std::vector<Coefficient> coefficients;
  Eigen::VectorXd fitted;
  Eigen::VectorXd residuals;
  std::size_t n = 0;
  std::size_t p = 0;
  double sigma2 = 0.0;

  const Coefficient& operator[](std::string_view term) const {
    for (const auto& c : coefficients)
      if (c.term == term) return c;
    throw ValidationError("no coefficient named '" + std::string(term) + "'");
  }
};

/// Least squares via column-pivoted Householder QR; 95% intervals from the
/// t distribution with n - p degrees of freedom and homoskedastic variance.
inline OlsFit ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const std::vector<std::string>& names,
                      double confidence = 0.95) {
  const auto n = X.rows(), p = X.cols();
  if (y.size() != n) throw ValidationError("response length does not match design rows");
  if (static_cast<Eigen::Index>(names.size()) != p) throw ValidationError("one name per design column required");
  if (n <= p) throw ValidationError("regression needs n > p (n=" + std::to_string(n) + ", p=" + std::to_string(p) + ")");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < p)
    throw ValidationError("design matrix is rank deficient (rank " + std::to_string(qr.rank()) + " < " +
                          std::to_string(p) + ")");
  const Eigen::VectorXd beta = qr.solve(y);

  OlsFit fit;
  fit.n = static_cast<std::size_t>(n);
  fit.p = static_cast<std::size_t>(p);
  fit.fitted = X * beta;
  fit.residuals = y - fit.fitted;
  const double df = static_cast<double>(n - p);
  fit.sigma2 = fit.residuals.squaredNorm() / df;

  // (X'X)^-1 = P R^-1 R^-T P'
  const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(p, p).template triangularView<Eigen::Upper>();
  const Eigen::MatrixXd Rinv =
      R.template triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
  const Eigen::MatrixXd inner = Rinv * Rinv.transpose();
  const auto& perm = qr.colsPermutation();
  const Eigen::MatrixXd cov = perm * inner * perm.transpose();

  const double tq = boost::math::quantile(boost::math::students_t(df), 0.5 + confidence / 2.0);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double se = std::sqrt(fit.sigma2 * cov(j, j));
    fit.coefficients.push_back({names[static_cast<std::size_t>(j)], beta(j), se, beta(j) - tq * se, beta(j) + tq * se});
  }
  return fit;
}

inline OlsFit ols_fit(const Design& d, double confidence = 0.95) { return ols_fit(d.X, d.y, d.columns, confidence); }

// -------------------------------------------------------- crude / adjusted

struct TableRow {
  std::string group;  // factor name, empty for intercept and numeric terms
  std::string label;  // printed variable
  bool reference = false;
  std::optional<Coefficient> crude;
  std::optional<Coefficient> adjusted;
};

struct RegressionTable {
  std::vector<TableRow> rows;
  OlsFit adjusted_fit;
};

/// Crude rows: the intercept comes from the intercept-only model; every
/// numeric term is fitted alone with an intercept; every factor is fitted as
/// one block of indicators. The adjusted model holds all terms together.
inline RegressionTable crude_and_adjusted(const std::vector<topics::ModelSummary>& rows, const ModelFormula& formula) {
  RegressionTable table;
  table.adjusted_fit = ols_fit(encode_design(rows, formula));
  const auto& adj = table.adjusted_fit;

  auto sub = [&](std::vector<NumericTerm> numeric, std::vector<FactorTerm> factors) {
    ModelFormula s = formula;
    s.numeric = std::move(numeric);
    s.factors = std::move(factors);
    return ols_fit(encode_design(rows, s));
  };

  const OlsFit null_fit = sub({}, {});
  table.rows.push_back({"", "Intercept", false, null_fit["Intercept"], adj["Intercept"]});
  for (const auto& t : formula.numeric) {
    const OlsFit f = sub({t}, {});
    table.rows.push_back({"", t.name, false, f[t.name], adj[t.name]});
  }
  for (const auto& fac : formula.factors) {
    const OlsFit f = sub({}, {fac});
    for (std::size_t l = 0; l < fac.levels.size(); ++l) {
      const std::string& shown = l < fac.display.size() ? fac.display[l] : fac.levels[l];
      if (l == 0) {
        table.rows.push_back({fac.name, shown, true, std::nullopt, std::nullopt});
        continue;
      }
      const std::string col = fac.name + ":" + fac.levels[l];
      table.rows.push_back({fac.name, shown, false, f[col], adj[col]});
    }
  }
  return table;
}

/// TSV in the usual crude/adjusted layout: factor group heading rows, reference
/// rows rendered as "0.00 / Reference", coefficients to 2 decimals.
inline std::string render_table_tsv(const RegressionTable& table, const std::string& header_comment = {}) {
  std::string out = header_comment.empty() ? "" : "# " + header_comment + "\n";
  out += "Variable\tCrude coefficient\tCrude 2.5% to 97.5%\tAdjusted coefficient\tAdjusted 2.5% to 97.5%\n";
  auto cell = [](const std::optional<Coefficient>& c) {
    return text::format_fixed(c->estimate, 2) + "\t" + text::format_fixed(c->ci_low, 2) + " to " +
           text::format_fixed(c->ci_high, 2);
  };
  std::string group;
  for (const auto& r : table.rows) {
    if (r.group != group) {
      group = r.group;
      if (!group.empty()) out += group + "\t\t\t\t\n";
    }
    if (r.reference)
      out += r.label + "\t0.00\tReference\t0.00\tReference\n";
    else
      out += r.label + "\t" + cell(r.crude) + "\t" + cell(r.adjusted) + "\n";
  }
  return out;
}

/// Machine-readable coefficients at full precision.
inline std::string render_coefficients_tsv(const RegressionTable& table, const std::string& header_comment = {}) {
  std::string out = header_comment.empty() ? "" : "# " + header_comment + "\n";
  out += "term\tmodel\testimate\tstd_error\tci_low\tci_high\n";
  for (const char* model : {"crude", "adjusted"}) {
    for (const auto& r : table.rows) {
      const auto& c = std::string_view(model) == "crude" ? r.crude : r.adjusted;
      if (!c) continue;
      const std::string term = r.group.empty() ? r.label : r.group + ":" + r.label;
      out += term + "\t" + model + "\t" + text::format_shortest(c->estimate) + "\t" +
             text::format_shortest(c->std_error) + "\t" + text::format_shortest(c->ci_low) + "\t" +
             text::format_shortest(c->ci_high) + "\n";
    }
  }
  return out;
}

}  // namespace radlabel::regress
