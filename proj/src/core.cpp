#include "esalloc/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace esalloc {

std::vector<double> Matrix::mul(std::span<const double> v) const {
    if (v.size() != cols_)
        throw std::invalid_argument("Matrix::mul: dimension mismatch");
    std::vector<double> out(rows_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < cols_; ++c) acc += data_[r * cols_ + c] * v[c];
        out[r] = acc;
    }
    return out;
}

LossPanel::LossPanel(std::vector<double> values, std::vector<std::int64_t> times,
                     std::vector<std::string> names)
    : values_(std::move(values)), times_(std::move(times)), names_(std::move(names)) {
    const std::size_t d = names_.size();
    const std::size_t t_count = times_.size();
    if (d < 2)
        throw std::invalid_argument("LossPanel: need at least 2 components, got " +
                                    std::to_string(d));
    if (t_count < 1) throw std::invalid_argument("LossPanel: empty panel");
    if (values_.size() != t_count * d)
        throw std::invalid_argument("LossPanel: values size does not match T x d");
    for (std::size_t t = 0; t < t_count; ++t) {
        for (std::size_t j = 0; j < d; ++j) {
            if (!std::isfinite(values_[t * d + j]))
                throw std::invalid_argument(
                    "LossPanel: non-finite entry at row " + std::to_string(t) +
                    ", column " + std::to_string(j) + " (" + names_[j] + ")");
        }
    }
    aggregate_.resize(t_count);
    for (std::size_t t = 0; t < t_count; ++t) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) s += values_[t * d + j];
        aggregate_[t] = s;
    }
}

std::vector<double> LossPanel::column(std::size_t j) const {
    std::vector<double> out(rows());
    for (std::size_t t = 0; t < rows(); ++t) out[t] = at(t, j);
    return out;
}

LossPanel LossPanel::slice(std::size_t first, std::size_t count) const {
    if (first + count > rows())
        throw std::invalid_argument("LossPanel::slice: out of range");
    const std::size_t d = cols();
    std::vector<double> vals(values_.begin() + first * d,
                             values_.begin() + (first + count) * d);
    std::vector<std::int64_t> ts(times_.begin() + first,
                                 times_.begin() + first + count);
    return LossPanel(std::move(vals), std::move(ts), names_);
}

LossPanel validate_panel(std::vector<double> values,
                         std::vector<std::int64_t> times,
                         std::vector<std::string> names) {
    return LossPanel(std::move(values), std::move(times), std::move(names));
}

std::vector<double> aggregate(const LossPanel& panel) { return panel.aggregate(); }

void ForecastRecord::validate() const {
    if (!std::isfinite(var) || !std::isfinite(es))
        throw std::invalid_argument("ForecastRecord: non-finite var/es");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("ForecastRecord: alpha outside (0,1)");
    for (double m : esc)
        if (!std::isfinite(m))
            throw std::invalid_argument("ForecastRecord: non-finite esc component");
}

double ForecastRecord::allocation_gap() const {
    double s = 0.0;
    for (double m : esc) s += m;
    return std::abs(s - es);
}

SimplexWeights::SimplexWeights(std::vector<double> w) : w_(std::move(w)) {
    if (w_.size() < 2)
        throw std::invalid_argument("SimplexWeights: need at least 2 components");
    double s = 0.0;
    for (double v : w_) {
        if (!(v > 0.0 && v < 1.0))
            throw std::invalid_argument(
                "SimplexWeights: component outside (0,1): " + std::to_string(v));
        s += v;
    }
    if (std::abs(s - 1.0) > sum_tolerance)
        throw std::invalid_argument("SimplexWeights: components sum to " +
                                    std::to_string(s) + ", not 1");
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_double(const std::string& s, const std::string& path, std::size_t line) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw std::runtime_error(path + ":" + std::to_string(line) +
                                 ": cannot parse number '" + s + "'");
    return v;
}

std::int64_t parse_time(const std::string& s, const std::string& path,
                        std::size_t line) {
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0')
        throw std::runtime_error(path + ":" + std::to_string(line) +
                                 ": cannot parse time '" + s + "'");
    return v;
}

} // namespace

LossPanel load_panel_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open panel file: " + path);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error(path + ": empty file");
    auto header = split_csv_line(line);
    if (header.size() < 3 || header[0] != "time")
        throw std::runtime_error(path + ": header must be time,<name_1>,...,<name_d>");
    std::vector<std::string> names(header.begin() + 1, header.end());

    std::vector<double> values;
    std::vector<std::int64_t> times;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != names.size() + 1)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected " + std::to_string(names.size() + 1) +
                                     " fields, got " + std::to_string(fields.size()));
        const std::int64_t t = parse_time(fields[0], path, lineno);
        if (!times.empty() && t <= times.back())
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": times must be strictly increasing");
        times.push_back(t);
        for (std::size_t j = 1; j < fields.size(); ++j)
            values.push_back(parse_double(fields[j], path, lineno));
    }
    return LossPanel(std::move(values), std::move(times), std::move(names));
}

void write_panel_csv(const std::string& path, const LossPanel& panel) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write panel file: " + path);
    out << "time";
    for (const auto& n : panel.names()) out << ',' << n;
    out << '\n';
    for (std::size_t t = 0; t < panel.rows(); ++t) {
        out << panel.times()[t];
        for (std::size_t j = 0; j < panel.cols(); ++j)
            out << ',' << format_double(panel.at(t, j));
        out << '\n';
    }
}

ForecastTable load_forecast_csv(const std::string& path, double alpha) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open forecast file: " + path);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error(path + ": empty file");
    auto header = split_csv_line(line);
    if (header.size() < 5 || header[0] != "time" || header[1] != "model" ||
        header[2] != "var" || header[3] != "es")
        throw std::runtime_error(
            path + ": header must be time,model,var,es,esc_1..esc_d");
    const std::size_t d = header.size() - 4;

    // model -> time -> record; orders preserved from first appearance.
    std::vector<std::string> model_order;
    std::map<std::string, std::map<std::int64_t, ForecastRecord>> by_model;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": wrong field count");
        const std::int64_t t = parse_time(fields[0], path, lineno);
        const std::string& model = fields[1];
        ForecastRecord rec;
        rec.alpha = alpha;
        rec.var = parse_double(fields[2], path, lineno);
        rec.es = parse_double(fields[3], path, lineno);
        rec.esc.resize(d);
        for (std::size_t j = 0; j < d; ++j)
            rec.esc[j] = parse_double(fields[4 + j], path, lineno);
        if (by_model.find(model) == by_model.end()) model_order.push_back(model);
        by_model[model][t] = std::move(rec);
    }
    if (by_model.empty()) throw std::runtime_error(path + ": no forecast rows");

    // All models must cover the same time set.
    const auto& ref = by_model.begin()->second;
    std::vector<std::int64_t> times;
    times.reserve(ref.size());
    for (const auto& [t, _] : ref) times.push_back(t);
    for (const auto& [name, recs] : by_model) {
        if (recs.size() != times.size())
            throw std::runtime_error(path + ": model '" + name +
                                     "' covers a different time range");
        std::size_t i = 0;
        for (const auto& [t, _] : recs)
            if (t != times[i++])
                throw std::runtime_error(path + ": model '" + name +
                                         "' covers a different time range");
    }

    ForecastTable table;
    table.times = times;
    for (const auto& name : model_order) {
        std::vector<ForecastRecord> recs;
        recs.reserve(times.size());
        for (auto& [_, rec] : by_model[name]) recs.push_back(std::move(rec));
        table.models.emplace_back(name, std::move(recs));
    }
    return table;
}

void write_forecast_csv(const std::string& path, const ForecastTable& table) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write forecast file: " + path);
    std::size_t d = 0;
    for (const auto& [_, recs] : table.models)
        if (!recs.empty()) d = recs.front().esc.size();
    out << "time,model,var,es";
    for (std::size_t j = 1; j <= d; ++j) out << ",esc_" << j;
    out << '\n';
    for (const auto& [name, recs] : table.models) {
        for (std::size_t i = 0; i < recs.size(); ++i) {
            out << table.times[i] << ',' << name << ','
                << format_double(recs[i].var) << ',' << format_double(recs[i].es);
            for (double m : recs[i].esc) out << ',' << format_double(m);
            out << '\n';
        }
    }
}

} // namespace esalloc
