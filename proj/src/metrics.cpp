#include "ocular/metrics.hpp"

#include <cmath>
#include <sstream>

namespace ocular {

namespace {

void check_inputs(std::span<const double> a, std::span<const double> b, const char* who) {
    if (a.empty() || a.size() != b.size())
        throw std::invalid_argument(std::string(who) + ": need equal nonzero lengths");
    for (double v : a)
        if (!std::isfinite(v)) throw std::invalid_argument(std::string(who) + ": non-finite input");
    for (double v : b)
        if (!std::isfinite(v)) throw std::invalid_argument(std::string(who) + ": non-finite input");
}

struct Moments {
    double mean_p, mean_t, var_p, var_t, cov;
};

Moments moments(std::span<const double> p, std::span<const double> t) {
    double n = static_cast<double>(p.size());
    Moments m{0, 0, 0, 0, 0};
    for (std::size_t i = 0; i < p.size(); ++i) {
        m.mean_p += p[i];
        m.mean_t += t[i];
    }
    m.mean_p /= n;
    m.mean_t /= n;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double dp = p[i] - m.mean_p, dt = t[i] - m.mean_t;
        m.var_p += dp * dp;
        m.var_t += dt * dt;
        m.cov += dp * dt;
    }
    m.var_p /= n;
    m.var_t /= n;
    m.cov /= n;
    return m;
}

int sign(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

double rmse(std::span<const double> pred, std::span<const double> target) {
    check_inputs(pred, target, "rmse");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        double d = pred[i] - target[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(pred.size()));
}

double pearson(std::span<const double> pred, std::span<const double> target) {
    check_inputs(pred, target, "pearson");
    Moments m = moments(pred, target);
    if (m.var_p == 0.0 || m.var_t == 0.0)
        throw std::invalid_argument("pearson: undefined correlation (zero variance)");
    return m.cov / std::sqrt(m.var_p * m.var_t);
}

double ccc(std::span<const double> pred, std::span<const double> target) {
    check_inputs(pred, target, "ccc");
    Moments m = moments(pred, target);
    double dm = m.mean_p - m.mean_t;
    double denom = m.var_p + m.var_t + dm * dm;
    if (denom == 0.0) {
        for (std::size_t i = 0; i < pred.size(); ++i)
            if (pred[i] != target[i])
                throw std::invalid_argument("ccc: undefined (both sequences constant)");
        return 1.0;
    }
    return 2.0 * m.cov / denom;
}

double sagr(std::span<const double> pred, std::span<const double> target) {
    check_inputs(pred, target, "sagr");
    std::size_t agree = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (sign(pred[i]) == sign(target[i])) ++agree;
    return static_cast<double>(agree) / static_cast<double>(pred.size());
}

namespace {

MetricRow column_metrics(const Tensor& p, const Tensor& t, int col) {
    std::vector<double> pv, tv;
    pv.reserve(p.dim(0));
    tv.reserve(p.dim(0));
    for (int n = 0; n < p.dim(0); ++n) {
        pv.push_back(p.at2(n, col));
        tv.push_back(t.at2(n, col));
    }
    MetricRow row;
    row.rmse = rmse(pv, tv);
    row.corr = pearson(pv, tv);
    row.ccc = ccc(pv, tv);
    row.sagr = sagr(pv, tv);
    return row;
}

}  // namespace

EvaluationReport evaluate_report(const Tensor& predictions, const Tensor& targets) {
    if (!predictions.same_shape(targets) || predictions.ndim() != 2 || predictions.dim(1) != 2)
        throw std::invalid_argument("evaluate_report: expected matching (n, 2) shapes");
    return {column_metrics(predictions, targets, 0), column_metrics(predictions, targets, 1)};
}

std::string format_report(const EvaluationReport& r, const std::string& label) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(3);
    std::size_t col = std::max<std::size_t>(label.size() + 2, 12);
    os << std::string(col, ' ') << "RMSE          CORR          CCC           SAGR\n";
    os << std::string(col, ' ') << "V      A      V      A      V      A      V      A\n";
    os << label << std::string(col - label.size(), ' ');
    os << r.valence.rmse << "  " << r.arousal.rmse << "  " << r.valence.corr << "  "
       << r.arousal.corr << "  " << r.valence.ccc << "  " << r.arousal.ccc << "  "
       << r.valence.sagr << "  " << r.arousal.sagr << "\n";
    return os.str();
}

std::string report_key_values(const EvaluationReport& r) {
    std::ostringstream os;
    os.precision(17);
    os << "valence.rmse=" << r.valence.rmse << "\nvalence.corr=" << r.valence.corr
       << "\nvalence.ccc=" << r.valence.ccc << "\nvalence.sagr=" << r.valence.sagr
       << "\narousal.rmse=" << r.arousal.rmse << "\narousal.corr=" << r.arousal.corr
       << "\narousal.ccc=" << r.arousal.ccc << "\narousal.sagr=" << r.arousal.sagr << "\n";
    return os.str();
}

}  // namespace ocular
