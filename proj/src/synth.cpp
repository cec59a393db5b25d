#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "esalloc/composition.hpp"
#include "esalloc/harness.hpp"
#include "esalloc/mathx.hpp"
#include "esalloc/models.hpp"
#include "esalloc/rng.hpp"

namespace esalloc {

namespace {

std::vector<std::string> default_names(const SimConfig& sim) {
    if (!sim.names.empty()) {
        if (sim.names.size() != sim.d)
            throw std::invalid_argument("sim.names: expected " +
                                        std::to_string(sim.d) + " entries");
        return sim.names;
    }
    std::vector<std::string> names;
    for (std::size_t j = 1; j <= sim.d; ++j)
        names.push_back("a" + std::to_string(j));
    return names;
}

std::vector<SimGarch> per_asset_garch(const SimConfig& sim) {
    std::vector<SimGarch> g = sim.garch;
    if (g.empty()) g.push_back(SimGarch{});
    if (g.size() == 1) g.assign(sim.d, g.front());
    if (g.size() != sim.d)
        throw std::invalid_argument("sim.garch: expected 1 or d entries");
    for (const auto& p : g) {
        if (!(p.omega > 0.0) || p.a < 0.0 || p.b < 0.0 || !(p.a + p.b < 1.0))
            throw std::invalid_argument(
                "sim.garch: need omega>0, a,b>=0, a+b<1");
    }
    return g;
}

Eigen::MatrixXd equicorrelation(std::size_t d, double rho) {
    Eigen::MatrixXd p = Eigen::MatrixXd::Constant(
        static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d), rho);
    p.diagonal().setOnes();
    return p;
}

} // namespace

SynthTruth synth_ccc_gaussian(const SimConfig& sim, double alpha,
                              std::uint64_t seed) {
    const std::size_t d = sim.d;
    const std::size_t T = sim.T;
    if (d < 2) throw std::invalid_argument("synth: need d >= 2");
    if (T < 1) throw std::invalid_argument("synth: need T >= 1");
    const auto garch = per_asset_garch(sim);

    const Eigen::MatrixXd P = equicorrelation(d, sim.rho);
    Eigen::LLT<Eigen::MatrixXd> llt(P);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("synth: correlation matrix not positive definite");
    const Eigen::MatrixXd L = llt.matrixL();

    const double z_alpha = normal_icdf(alpha);
    const double es_c = normal_es_factor(alpha);

    CounterRng rng(seed, hash_name("synth_ccc"));
    std::vector<double> values(T * d);
    std::vector<double> true_var(T), true_es(T);
    Matrix true_esc(T, d);

    std::vector<double> sig2(d);
    for (std::size_t j = 0; j < d; ++j)
        sig2[j] = garch[j].omega / (1.0 - garch[j].a - garch[j].b);

    Eigen::VectorXd xi(static_cast<Eigen::Index>(d));
    Matrix cov(d, d);
    std::vector<double> zero_mu(d, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
        // Conditional covariance D P D and the implied analytic truth.
        double quad = 0.0;
        for (std::size_t r = 0; r < d; ++r) {
            for (std::size_t c = 0; c < d; ++c) {
                cov(r, c) = std::sqrt(sig2[r] * sig2[c]) *
                            P(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
                quad += cov(r, c);
            }
        }
        const double sd_total = std::sqrt(quad);
        true_var[t] = sd_total * z_alpha;
        true_es[t] = sd_total * es_c;
        const auto esc = elliptical_allocation(zero_mu, cov, true_es[t]);
        for (std::size_t j = 0; j < d; ++j) true_esc(t, j) = esc[j];

        for (std::size_t j = 0; j < d; ++j)
            xi(static_cast<Eigen::Index>(j)) = rng.next_gaussian();
        const Eigen::VectorXd z = L * xi;
        for (std::size_t j = 0; j < d; ++j) {
            const double x = std::sqrt(sig2[j]) * z(static_cast<Eigen::Index>(j));
            values[t * d + j] = x;
            sig2[j] = garch[j].omega + garch[j].a * x * x + garch[j].b * sig2[j];
        }
    }

    std::vector<std::int64_t> times(T);
    for (std::size_t t = 0; t < T; ++t) times[t] = static_cast<std::int64_t>(t + 1);
    return SynthTruth{LossPanel(std::move(values), std::move(times),
                               default_names(sim)),
                      std::move(true_var), std::move(true_es), std::move(true_esc)};
}

SynthTruth synth_weight_dynamics(const SimConfig& sim, double alpha,
                                 std::uint64_t seed, double epsilon) {
    const std::size_t d = sim.d;
    const std::size_t T = sim.T;
    if (d < 2) throw std::invalid_argument("synth: need d >= 2");
    if (T < 1) throw std::invalid_argument("synth: need T >= 1");
    const auto garch = per_asset_garch(sim);
    const SimGarch g = garch.front(); // aggregate dynamics
    const std::size_t k = d - 1;
    const std::size_t q = 2 * k;

    const double z_alpha = normal_icdf(alpha);
    const double es_c = normal_es_factor(alpha);

    // Seeded parameter draws with magnitudes bounded away from zero, so
    // every generated panel carries materially dynamic weights. Draws whose
    // weight path saturates toward the simplex boundary are rejected and
    // redrawn: the model premise is 0 < ESC < ES throughout.
    CounterRng theta_rng(seed, hash_name("synth_weights_theta"));
    auto draw = [&](double scale) {
        const double g = theta_rng.next_gaussian();
        return scale * (g < 0.0 ? -1.0 : 1.0) * (0.5 + 0.5 * std::abs(g));
    };
    const SimplexWeights w1 = closing(std::vector<double>(d, 1.0));
    const ContrastMatrix V(d);

    std::vector<double> values(T * d);
    std::vector<double> true_var(T), true_es(T);
    Matrix true_esc(T, d);

    constexpr std::size_t max_attempts = 64;
    for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
        ThetaParams theta = zero_theta(w1, q);
        for (std::size_t i = 0; i < k; ++i) theta.tau[i] = draw(sim.tau_scale);
        // Damped rotation blocks keep the path bounded while the weights
        // cycle; a leftover coordinate falls back to plain damping.
        const double co = sim.phi_diag * std::cos(sim.phi_angle);
        const double si = sim.phi_diag * std::sin(sim.phi_angle);
        for (std::size_t b = 0; b + 1 < k; b += 2) {
            theta.phi(b, b) = co;
            theta.phi(b, b + 1) = -si;
            theta.phi(b + 1, b) = si;
            theta.phi(b + 1, b + 1) = co;
        }
        if (k % 2 == 1) theta.phi(k - 1, k - 1) = sim.phi_diag;
        for (std::size_t r = 0; r < k; ++r)
            for (std::size_t c = 0; c < q; ++c) theta.psi(r, c) = draw(sim.psi_scale);

        CounterRng rng(seed, hash_name("synth_weights"), attempt);
        double sig2 = g.omega / (1.0 - g.a - g.b);
        SimplexWeights w = w1;
        std::size_t clamps = 0;
        double w_min = 1.0, w_max = 0.0;
        std::vector<double> noise(d), row(d), xi(k);
        for (std::size_t t = 0; t < T; ++t) {
            const double sigma = std::sqrt(sig2);
            true_var[t] = sigma * z_alpha;
            true_es[t] = sigma * es_c;

            const double s = sigma * rng.next_gaussian();
            for (std::size_t i = 0; i < k; ++i) xi[i] = rng.next_gaussian();
            // Zero-sum noise through the contrast matrix keeps the
            // aggregate exactly the GARCH draw.
            for (std::size_t r = 0; r < d; ++r) {
                double acc = 0.0;
                for (std::size_t c = 0; c < k; ++c) acc += V.at(r, c) * xi[c];
                noise[r] = sim.noise_scale * sigma * acc;
            }
            for (std::size_t j = 0; j < d; ++j) {
                row[j] = w[j] * s + noise[j];
                values[t * d + j] = row[j];
                true_esc(t, j) = w[j] * true_es[t];
                w_min = std::min(w_min, w[j]);
                w_max = std::max(w_max, w[j]);
            }

            const auto y = build_covariates(row, s, epsilon);
            w = clamp_interior(step_weights(theta, w, y), weight_floor, &clamps);
            sig2 = g.omega + g.a * s * s + g.b * sig2;
        }
        if (w_min >= 0.02 && w_max <= 0.98) break;
        if (attempt + 1 == max_attempts)
            throw std::runtime_error(
                "synth_weight_dynamics: no interior weight path found; "
                "weaken tau/psi scales");
    }

    std::vector<std::int64_t> times(T);
    for (std::size_t t = 0; t < T; ++t) times[t] = static_cast<std::int64_t>(t + 1);
    return SynthTruth{LossPanel(std::move(values), std::move(times),
                               default_names(sim)),
                      std::move(true_var), std::move(true_es), std::move(true_esc)};
}

SynthTruth make_synth(const SimConfig& sim, double alpha, std::uint64_t seed,
                      double epsilon) {
    if (sim.kind == "ccc") return synth_ccc_gaussian(sim, alpha, seed);
    if (sim.kind == "weights")
        return synth_weight_dynamics(sim, alpha, seed, epsilon);
    throw std::invalid_argument("sim.kind: unknown generator '" + sim.kind + "'");
}

void write_truth_csv(const std::string& path, const SynthTruth& truth) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write truth file: " + path);
    const std::size_t d = truth.panel.cols();
    out << "time,true_var,true_es";
    for (std::size_t j = 1; j <= d; ++j) out << ",true_esc_" << j;
    out << '\n';
    for (std::size_t t = 0; t < truth.panel.rows(); ++t) {
        out << truth.panel.times()[t] << ',' << format_double(truth.true_var[t])
            << ',' << format_double(truth.true_es[t]);
        for (std::size_t j = 0; j < d; ++j)
            out << ',' << format_double(truth.true_esc(t, j));
        out << '\n';
    }
}

SynthTruth load_truth_csv(const std::string& path, const LossPanel& panel) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open truth file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");

    const std::size_t d = panel.cols();
    std::vector<double> tv, te;
    Matrix esc(panel.rows(), d);
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (row >= panel.rows())
            throw std::runtime_error(path + ": more rows than the panel");
        std::size_t pos = 0, field = 0;
        std::int64_t t = 0;
        double var = 0.0, es = 0.0;
        std::vector<double> esc_row(d);
        while (pos <= line.size()) {
            const std::size_t next = line.find(',', pos);
            const std::string tok =
                line.substr(pos, next == std::string::npos ? next : next - pos);
            char* end = nullptr;
            if (field == 0)
                t = std::strtoll(tok.c_str(), &end, 10);
            else if (field == 1)
                var = std::strtod(tok.c_str(), &end);
            else if (field == 2)
                es = std::strtod(tok.c_str(), &end);
            else if (field - 3 < d)
                esc_row[field - 3] = std::strtod(tok.c_str(), &end);
            else
                throw std::runtime_error(path + ": too many fields");
            ++field;
            if (next == std::string::npos) break;
            pos = next + 1;
        }
        if (field != d + 3)
            throw std::runtime_error(path + ": expected " + std::to_string(d + 3) +
                                     " fields");
        if (t != panel.times()[row])
            throw std::runtime_error(path + ": times do not match the panel");
        tv.push_back(var);
        te.push_back(es);
        for (std::size_t j = 0; j < d; ++j) esc(row, j) = esc_row[j];
        ++row;
    }
    if (row != panel.rows())
        throw std::runtime_error(path + ": fewer rows than the panel");
    return SynthTruth{panel, std::move(tv), std::move(te), std::move(esc)};
}

} // namespace esalloc
