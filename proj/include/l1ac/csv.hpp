#pragma once

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "l1ac/engine.hpp"

namespace l1ac {

/// 17 significant digits, enough to read back the identical double.
inline std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::vector<std::string> csv_header(Eigen::Index n, Eigen::Index m, Eigen::Index n2) {
    std::vector<std::string> cols{"t", "r", "y", "y_M"};
    if (m == 1) {
        cols.emplace_back("u_a");
    } else {
        for (Eigen::Index j = 1; j <= m; ++j) cols.push_back("u_a_" + std::to_string(j));
    }
    for (Eigen::Index j = 1; j <= m; ++j) cols.push_back("sigma1_" + std::to_string(j));
    for (Eigen::Index j = 1; j <= n2; ++j) cols.push_back("sigma2_" + std::to_string(j));
    for (Eigen::Index j = 1; j <= n; ++j) cols.push_back("x_" + std::to_string(j));
    for (Eigen::Index j = 1; j <= n; ++j) cols.push_back("xhat_" + std::to_string(j));
    return cols;
}

/// Header row, then one row per sample, values with 17 significant digits.
inline void write_csv(const SimTrace& trace, std::ostream& out) {
    const auto cols = csv_header(trace.states(), trace.inputs(), trace.unmatched_dim());
    for (std::size_t j = 0; j < cols.size(); ++j) {
        out << (j ? "," : "") << cols[j];
    }
    out << '\n';
    auto put_vec = [&out](const Vector& v) {
        for (Eigen::Index j = 0; j < v.size(); ++j) out << ',' << format_real(v(j));
    };
    for (std::size_t i = 0; i < trace.size(); ++i) {
        out << format_real(trace.t[i]) << ',' << format_real(trace.r[i]) << ','
            << format_real(trace.y[i]) << ',' << format_real(trace.y_m[i]);
        put_vec(trace.u_a[i]);
        put_vec(trace.sigma1[i]);
        put_vec(trace.sigma2[i]);
        put_vec(trace.x[i]);
        put_vec(trace.x_hat[i]);
        out << '\n';
    }
}

inline void emit_csv(const SimTrace& trace, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("emit_csv: cannot open " + path.string());
    }
    write_csv(trace, out);
    out.flush();
    if (!out) {
        throw Error("emit_csv: write failed for " + path.string());
    }
}

/// Parses a trace written by write_csv. x_tilde is rebuilt as x_hat - x.
inline SimTrace read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw Error("read_csv: missing header");
    }
    std::vector<std::string> cols;
    {
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) cols.push_back(c);
    }
    auto count_prefix = [&cols](const std::string& prefix) {
        Eigen::Index k = 0;
        for (const auto& c : cols) {
            if (c.rfind(prefix, 0) == 0) ++k;
        }
        return k;
    };
    const Eigen::Index m = count_prefix("sigma1_");
    const Eigen::Index n2 = count_prefix("sigma2_");
    const Eigen::Index n = count_prefix("xhat_");
    if (csv_header(n, m, n2) != cols) {
        throw Error("read_csv: unrecognized header");
    }

    SimTrace trace;
    std::vector<double> row;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        row.clear();
        const char* p = line.data();
        const char* end = line.data() + line.size();
        while (p <= end) {
            const char* comma = std::find(p, end, ',');
            double v = 0.0;
            const auto res = std::from_chars(p, comma, v);
            if (res.ec != std::errc{} || res.ptr != comma) {
                throw Error("read_csv: bad number on line " + std::to_string(line_no));
            }
            row.push_back(v);
            p = comma + 1;
        }
        if (row.size() != cols.size()) {
            throw Error("read_csv: wrong column count on line " + std::to_string(line_no));
        }
        std::size_t k = 0;
        auto take = [&](Eigen::Index len) {
            Vector v(len);
            for (Eigen::Index j = 0; j < len; ++j) v(j) = row[k++];
            return v;
        };
        trace.t.push_back(row[k++]);
        trace.r.push_back(row[k++]);
        trace.y.push_back(row[k++]);
        trace.y_m.push_back(row[k++]);
        trace.u_a.push_back(take(m));
        trace.sigma1.push_back(take(m));
        trace.sigma2.push_back(take(n2));
        trace.x.push_back(take(n));
        trace.x_hat.push_back(take(n));
        trace.x_tilde.push_back(trace.x_hat.back() - trace.x.back());
    }
    return trace;
}

inline SimTrace read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("read_csv: cannot open " + path.string());
    }
    return read_csv(in);
}

}  // namespace l1ac
