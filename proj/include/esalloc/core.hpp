// Domain types shared by every module: the loss panel, forecast records,
// simplex weight vectors and lexicographically ordered score pairs. All
// types are immutable values after construction.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace esalloc {

/// Minimal dense row-major matrix. Enough for the small (d-1)-dimensional
/// parameter blocks and covariance matrices that appear here.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    std::vector<double> mul(std::span<const double> v) const;

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

/// T x d panel of realized losses (positive values are losses). The
/// aggregate series S_t is derived at construction from left-to-right row
/// sums and can never be supplied externally.
class LossPanel {
public:
    LossPanel(std::vector<double> values, std::vector<std::int64_t> times,
              std::vector<std::string> names);

    std::size_t rows() const { return times_.size(); }
    std::size_t cols() const { return names_.size(); }

    double at(std::size_t t, std::size_t j) const {
        return values_[t * names_.size() + j];
    }
    std::span<const double> row(std::size_t t) const {
        return {values_.data() + t * names_.size(), names_.size()};
    }
    /// Column j as a contiguous copy.
    std::vector<double> column(std::size_t j) const;

    const std::vector<std::int64_t>& times() const { return times_; }
    const std::vector<std::string>& names() const { return names_; }
    const std::vector<double>& aggregate() const { return aggregate_; }

    /// Sub-panel of rows [first, first + count).
    LossPanel slice(std::size_t first, std::size_t count) const;

private:
    std::vector<double> values_; // row-major
    std::vector<std::int64_t> times_;
    std::vector<std::string> names_;
    std::vector<double> aggregate_;
};

LossPanel validate_panel(std::vector<double> values,
                         std::vector<std::int64_t> times,
                         std::vector<std::string> names);

/// S_t = sum_j X_{j,t}, left-to-right.
std::vector<double> aggregate(const LossPanel& panel);

/// One-step-ahead forecast tuple: per-component ES contributions, total
/// VaR and total ES at confidence level alpha.
struct ForecastRecord {
    std::vector<double> esc;
    double var = 0.0;
    double es = 0.0;
    double alpha = 0.975;

    void validate() const; // finiteness checks

    /// max_j |sum esc - es| check used by compositional producers.
    double allocation_gap() const;
};

/// (VaR score, ESC score) compared lexicographically: the VaR component
/// decides unless exactly tied.
struct ScorePair {
    double var_score = 0.0;
    double esc_score = 0.0;

    friend bool operator==(const ScorePair&, const ScorePair&) = default;
};

inline bool lex_less(const ScorePair& a, const ScorePair& b) {
    return a.var_score < b.var_score ||
           (a.var_score == b.var_score && a.esc_score < b.esc_score);
}
inline bool lex_leq(const ScorePair& a, const ScorePair& b) {
    return a.var_score < b.var_score ||
           (a.var_score == b.var_score && a.esc_score <= b.esc_score);
}

/// Allocation weight vector in the open simplex: every component in (0,1),
/// components summing to one within 1e-12.
class SimplexWeights {
public:
    explicit SimplexWeights(std::vector<double> w);

    std::size_t dim() const { return w_.size(); }
    double operator[](std::size_t j) const { return w_[j]; }
    const std::vector<double>& values() const { return w_; }
    std::span<const double> span() const { return w_; }

    static constexpr double sum_tolerance = 1e-12;

private:
    std::vector<double> w_;
};

// CSV formats. Panels: header `time,<name_1>,...,<name_d>` with strictly
// increasing integer times. Forecasts: `time,model,var,es,esc_1..esc_d`.
LossPanel load_panel_csv(const std::string& path);
void write_panel_csv(const std::string& path, const LossPanel& panel);

struct ForecastTable {
    std::vector<std::int64_t> times;
    // model -> record per time (aligned with `times`)
    std::vector<std::pair<std::string, std::vector<ForecastRecord>>> models;
};
ForecastTable load_forecast_csv(const std::string& path, double alpha);
void write_forecast_csv(const std::string& path, const ForecastTable& table);

/// Deterministic shortest round-trip text form used by every CSV writer.
std::string format_double(double v);

} // namespace esalloc
