#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "mweights/core/error.hpp"

namespace mweights {

/// (p_1, ..., p_m) with 1/p = sum 1/p_i. Every p_i lies in (1, inf).
class ExponentTuple {
public:
    ExponentTuple() = default;

    explicit ExponentTuple(std::vector<double> p) : p_(std::move(p))
    {
        if (p_.empty())
            throw ConfigError("exponent tuple needs at least one entry");
        double inv = 0.0;
        for (double pi : p_) {
            if (!(pi > 1.0) || !std::isfinite(pi))
                throw ConfigError("exponent " + std::to_string(pi) + " outside (1, inf)");
            inv += 1.0 / pi;
        }
        p_total_ = 1.0 / inv;
    }

    /// "2,2" or "4,4/3".
    static ExponentTuple parse(std::string_view text)
    {
        std::vector<double> out;
        std::size_t start = 0;
        while (start <= text.size()) {
            const std::size_t comma = std::min(text.find(',', start), text.size());
            out.push_back(parse_ratio(text.substr(start, comma - start)));
            start = comma + 1;
        }
        return ExponentTuple(std::move(out));
    }

    int m() const { return static_cast<int>(p_.size()); }
    double operator[](int i) const { return p_[static_cast<std::size_t>(i)]; }
    const std::vector<double>& values() const { return p_; }
    double p() const { return p_total_; }

    double conj(int i) const
    {
        const double pi = (*this)[i];
        return pi / (pi - 1.0);
    }

    bool has_dual() const { return p_total_ > 1.0; }

    double p_dual() const
    {
        if (!has_dual())
            throw ConfigError("p = " + std::to_string(p_total_) + " <= 1 has no finite conjugate");
        return p_total_ / (p_total_ - 1.0);
    }

    /// max_i p_i' / p
    double maximal_exponent() const
    {
        double e = 0.0;
        for (int i = 0; i < m(); ++i)
            e = std::max(e, conj(i) / p_total_);
        return e;
    }

    /// max(1, p_1'/p, ..., p_m'/p); equals 1 exactly when p >= max p_i'.
    double sparse_exponent() const
    {
        double mx = 0.0;
        for (int i = 0; i < m(); ++i)
            mx = std::max(mx, conj(i));
        return p_total_ >= mx ? 1.0 : mx / p_total_;
    }

    ExponentTuple with(int i, double value) const
    {
        std::vector<double> q = p_;
        q.at(static_cast<std::size_t>(i)) = value;
        return ExponentTuple(std::move(q));
    }

    std::string str() const
    {
        std::string s;
        for (std::size_t i = 0; i < p_.size(); ++i) {
            if (i)
                s += ',';
            char buf[32];
            auto r = std::to_chars(buf, buf + sizeof buf, p_[i]);
            s.append(buf, r.ptr);
        }
        return s;
    }

private:
    static double parse_number(std::string_view s)
    {
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
            throw ConfigError("cannot parse exponent '" + std::string(s) + "'");
        return v;
    }

    static double parse_ratio(std::string_view s)
    {
        while (!s.empty() && s.front() == ' ')
            s.remove_prefix(1);
        while (!s.empty() && s.back() == ' ')
            s.remove_suffix(1);
        if (s == "inf")
            return std::numeric_limits<double>::infinity();
        const auto slash = s.find('/');
        if (slash == std::string_view::npos)
            return parse_number(s);
        return parse_number(s.substr(0, slash)) / parse_number(s.substr(slash + 1));
    }

    std::vector<double> p_;
    double p_total_ = 0.0;
};

} // namespace mweights
