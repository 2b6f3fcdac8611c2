#include "provlab/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "provlab/planners.hpp"
#include "provlab/rng.hpp"

namespace provlab {

numvec bellman_apply(const MdpModel& m, const numvec& v) {
    if (static_cast<int>(v.size()) != m.num_states())
        throw std::invalid_argument("bellman_apply: value vector size mismatch");
    for (double t : v)
        if (t < -1e-12 || t > 1.0 + 1e-12)
            throw std::invalid_argument("bellman_apply: values must lie in [0, 1]");
    numvec out(m.num_states(), 0.0);
    for (int x = 0; x < m.num_states(); ++x) {
        double best = 0.0;
        for (int a = 0; a < m.num_actions(x); ++a) {
            double s = 0.0;
            for (const auto& [y, p] : m.kernel[x][a]) s += p * v[y];
            best = std::max(best, clip01(s));
        }
        out[x] = m.is_goal(x) ? 1.0 : best;
    }
    return out;
}

CertificateSequence validate_certificate(const MdpModel& m, CertificateSequence cert) {
    if (static_cast<int>(cert.funcs.size()) != m.horizon + 1)
        throw std::invalid_argument("validate_certificate: horizon mismatch");
    for (const auto& row : cert.funcs)
        if (static_cast<int>(row.size()) != m.num_states())
            throw std::invalid_argument("validate_certificate: state count mismatch");

    cert.violations.clear();
    const bool upper = cert.side == CertSide::upper;
    // base condition against the goal indicator
    for (int x = 0; x < m.num_states(); ++x) {
        const double base = m.is_goal(x) ? 1.0 : 0.0;
        const double slack = upper ? cert.funcs[0][x] - base : base - cert.funcs[0][x];
        if (slack < -kCertTol) cert.violations.push_back({0, x, slack});
    }
    // one-step inequalities through the backup
    for (int b = 0; b + 1 <= m.horizon; ++b) {
        const numvec tv = bellman_apply(m, cert.funcs[b]);
        for (int x = 0; x < m.num_states(); ++x) {
            const double slack =
                upper ? cert.funcs[b + 1][x] - tv[x] : tv[x] - cert.funcs[b + 1][x];
            if (slack < -kCertTol) cert.violations.push_back({b + 1, x, slack});
        }
    }
    cert.valid = cert.violations.empty();
    return cert;
}

std::string CertificateResult::csv_row(const std::string& model_id,
                                       const std::string& x0_name) const {
    std::ostringstream os;
    os.precision(17);
    os << model_id << ',' << x0_name << ',' << lower << ',' << upper << ',' << gap << ','
       << (status == CertStatus::ok || status == CertStatus::invalid_upper ? 1 : 0) << ','
       << (status == CertStatus::ok || status == CertStatus::invalid_lower ? 1 : 0);
    return os.str();
}

CertificateResult score_certificate(const MdpModel& m, const ScoreFunction& scores,
                                    const numvec& eps, int x0, const ValueTables* tables) {
    const int B = m.horizon;
    if (static_cast<int>(eps.size()) != B + 1)
        throw std::invalid_argument("score_certificate: eps must have an entry per depth");
    for (int b = 1; b <= B; ++b)
        if (eps[b] < 0.0) throw std::invalid_argument("score_certificate: negative eps");

    CertificateResult res;
    res.state = x0;
    if (m.is_goal(x0)) {
        res.lower = res.upper = 1.0;
        res.gap = 0.0;
    } else {
        double h = 0.0;
        bool first = true;
        for (int a = 0; a < m.num_actions(x0); ++a) {
            const double v = scores.at(B, x0, a);
            if (first || v > h) h = v;
            first = false;
        }
        res.upper = clip01(h + eps[B]);
        res.lower = clip01(h - eps[B]);
        res.gap = res.upper - res.lower;
    }

    if (tables) {
        // the guarantee is conditional on the declared accuracy over the
        // reachable pairs; flag rather than throw when it fails
        const auto reach = reachable_sets(m, x0);
        for (int b = 1; b <= B && !res.premise_violated; ++b) {
            for (int x : reach[B - b]) {
                for (int a = 0; a < m.num_actions(x); ++a) {
                    if (std::abs(scores.at(b, x, a) - tables->q[b][x][a]) > eps[b] + 1e-12) {
                        res.premise_violated = true;
                        break;
                    }
                }
                if (res.premise_violated) break;
            }
        }
    }
    return res;
}

CertificateResult certify_sandwich(const MdpModel& m, const CertificateSequence& lower,
                                   const CertificateSequence& upper, int x0) {
    if (lower.side != CertSide::lower || upper.side != CertSide::upper)
        throw std::invalid_argument("certify_sandwich: sequences on the wrong sides");
    CertificateResult res;
    res.state = x0;
    const bool lo_ok = lower.valid;
    const bool hi_ok = upper.valid;
    if (lo_ok && hi_ok)
        res.status = CertStatus::ok;
    else if (!lo_ok && !hi_ok)
        res.status = CertStatus::both_invalid;
    else
        res.status = lo_ok ? CertStatus::invalid_upper : CertStatus::invalid_lower;
    if (res.status != CertStatus::ok) {
        res.violations = lower.violations;
        res.violations.insert(res.violations.end(), upper.violations.begin(),
                              upper.violations.end());
        return res;  // no bound claim
    }
    res.lower = lower.funcs[m.horizon][x0];
    res.upper = upper.funcs[m.horizon][x0];
    res.gap = res.upper - res.lower;
    return res;
}

CertificateSequence trivial_upper(const MdpModel& m) {
    CertificateSequence c;
    c.side = CertSide::upper;
    c.funcs.assign(m.horizon + 1, numvec(m.num_states(), 1.0));
    return validate_certificate(m, std::move(c));
}

CertificateSequence trivial_lower(const MdpModel& m) {
    CertificateSequence c;
    c.side = CertSide::lower;
    c.funcs.assign(m.horizon + 1, numvec(m.num_states(), 0.0));
    return validate_certificate(m, std::move(c));
}

std::pair<CertificateSequence, CertificateSequence> relaxed_certificate_pair(
    const MdpModel& m, double max_slack, std::uint64_t seed) {
    Rng rng(Rng::derive(seed, 0xce57u));
    const int S = m.num_states();

    CertificateSequence up;
    up.side = CertSide::upper;
    up.funcs.assign(m.horizon + 1, numvec(S, 0.0));
    CertificateSequence lo;
    lo.side = CertSide::lower;
    lo.funcs.assign(m.horizon + 1, numvec(S, 0.0));

    for (int x = 0; x < S; ++x) {
        const double base = m.is_goal(x) ? 1.0 : 0.0;
        up.funcs[0][x] = std::min(1.0, base + rng.uniform(0.0, max_slack));
        lo.funcs[0][x] = std::max(0.0, base - rng.uniform(0.0, max_slack));
    }
    for (int b = 0; b + 1 <= m.horizon; ++b) {
        const numvec tu = bellman_apply(m, up.funcs[b]);
        const numvec tl = bellman_apply(m, lo.funcs[b]);
        for (int x = 0; x < S; ++x) {
            up.funcs[b + 1][x] = std::min(1.0, tu[x] + rng.uniform(0.0, max_slack));
            lo.funcs[b + 1][x] = std::max(0.0, tl[x] - rng.uniform(0.0, max_slack));
        }
    }
    return {validate_certificate(m, std::move(lo)), validate_certificate(m, std::move(up))};
}

}  // namespace provlab
