#include "afos/ranktest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "afos/error.hpp"

namespace afos::ranktest {

void AccuracyTable::check() const {
    if (rows.empty() || columns.empty()) throw DataError("accuracy table is empty");
    if (cells.size() != rows.size()) throw DataError("accuracy table row count mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i].size() != columns.size())
            throw DataError("row '" + rows[i] + "' has " + std::to_string(cells[i].size()) + " cells, expected " +
                            std::to_string(columns.size()));
        for (double v : cells[i])
            if (!std::isfinite(v)) throw DataError("row '" + rows[i] + "' has a non-finite cell");
    }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        const auto b = field.find_first_not_of(" \t\r");
        const auto e = field.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

AccuracyTable read_csv(std::istream& in) {
    AccuracyTable t;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto fields = split_csv(line);
        if (t.columns.empty()) {
            if (fields.size() < 2) throw DataError("line " + std::to_string(lineno) + ": header needs a column label");
            t.columns.assign(fields.begin() + 1, fields.end());
            continue;
        }
        if (fields.size() != t.columns.size() + 1)
            throw DataError("line " + std::to_string(lineno) + ": expected " + std::to_string(t.columns.size() + 1) +
                            " fields, got " + std::to_string(fields.size()));
        t.rows.push_back(fields[0]);
        std::vector<double> row;
        for (std::size_t j = 1; j < fields.size(); ++j) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(fields[j], &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != fields[j].size() || !std::isfinite(v))
                throw DataError("line " + std::to_string(lineno) + ": '" + fields[j] + "' is not a finite number");
            row.push_back(v);
        }
        t.cells.push_back(std::move(row));
    }
    t.check();
    return t;
}

AccuracyTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    return read_csv(in);
}

RankMatrix rank_columns(const AccuracyTable& table) {
    table.check();
    const std::size_t na = table.n_a(), nm = table.n_m();
    RankMatrix ranks(na, std::vector<double>(nm, 0.0));
    std::vector<std::size_t> order(na);
    for (std::size_t j = 0; j < nm; ++j) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return table.cells[a][j] < table.cells[b][j]; });
        for (std::size_t start = 0; start < na;) {
            std::size_t end = start + 1;
            while (end < na && table.cells[order[end]][j] == table.cells[order[start]][j]) ++end;
            const double avg = (static_cast<double>(start + 1) + static_cast<double>(end)) / 2.0;
            for (std::size_t k = start; k < end; ++k) ranks[order[k]][j] = avg;
            start = end;
        }
    }
    return ranks;
}

double friedman_chi2(const std::vector<double>& mean_ranks, std::size_t n_m) {
    const auto na = static_cast<double>(mean_ranks.size());
    double sum_sq = 0.0;
    for (double r : mean_ranks) sum_sq += r * r;
    const double chi2 = 12.0 * static_cast<double>(n_m) / (na * (na + 1.0)) * (sum_sq - na * (na + 1.0) * (na + 1.0) / 4.0);
    return std::max(chi2, 0.0);
}

double gamma_q(double a, double x) {
    if (!(a > 0.0) || !(x >= 0.0)) throw DomainError("gamma_q needs a > 0 and x >= 0");
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    const double log_prefix = a * std::log(x) - x - std::lgamma(a);
    constexpr double eps = 1e-16;
    if (x < a + 1.0) {
        // Series for P, then Q = 1 - P.
        double term = 1.0 / a, sum = term;
        for (int n = 1; n < 10000; ++n) {
            term *= x / (a + n);
            sum += term;
            if (std::abs(term) < std::abs(sum) * eps) break;
        }
        return std::clamp(1.0 - sum * std::exp(log_prefix), 0.0, 1.0);
    }
    // Lentz continued fraction for Q.
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) break;
    }
    return std::clamp(std::exp(log_prefix) * h, 0.0, 1.0);
}

double chi2_sf(double chi2, int dof) {
    if (dof < 0) throw DomainError("negative degrees of freedom");
    if (dof == 0) return chi2 > 0.0 ? 0.0 : 1.0;
    return gamma_q(dof / 2.0, std::max(chi2, 0.0) / 2.0);
}

FriedmanResult friedman(const RankMatrix& ranks, DofMode mode) {
    const std::size_t na = ranks.size();
    const std::size_t nm = na ? ranks.front().size() : 0;
    if (na < 2 || nm < 1)
        throw DataError("Friedman test needs at least 2 functions and 1 block, got " + std::to_string(na) + " x " +
                        std::to_string(nm));
    FriedmanResult r;
    r.ranks = ranks;
    for (const auto& row : ranks) {
        if (row.size() != nm) throw DataError("rank matrix is not rectangular");
        r.mean_ranks.push_back(std::accumulate(row.begin(), row.end(), 0.0) / static_cast<double>(nm));
    }
    r.chi2 = friedman_chi2(r.mean_ranks, nm);
    r.dof = static_cast<int>(mode == DofMode::paper ? nm - 1 : na - 1);
    r.p_value = chi2_sf(r.chi2, r.dof);
    r.reject_h0 = r.p_value < 0.05;
    return r;
}

Report compare_report(const AccuracyTable& table, DofMode mode) {
    if (table.n_a() < 2) throw DataError("Friedman test needs at least 2 functions");
    Report rep;
    rep.result = friedman(rank_columns(table), mode);
    for (std::size_t i = 0; i < table.n_a(); ++i) rep.ranking.emplace_back(table.rows[i], rep.result.mean_ranks[i]);
    std::stable_sort(rep.ranking.begin(), rep.ranking.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    return rep;
}

std::string to_json(const Report& r) {
    nlohmann::ordered_json j;
    j["chi2"] = r.result.chi2;
    j["dof"] = r.result.dof;
    j["p_value"] = r.result.p_value;
    j["reject_h0"] = r.result.reject_h0;
    auto& ranking = j["ranking"] = nlohmann::ordered_json::array();
    for (const auto& [name, rank] : r.ranking) ranking.push_back({{"function", name}, {"mean_rank", rank}});
    return j.dump(2);
}

std::string to_text(const Report& r) {
    std::ostringstream os;
    std::size_t width = 8;
    for (const auto& [name, _] : r.ranking) width = std::max(width, name.size());
    os << std::left << std::setw(static_cast<int>(width)) << "function" << "  R_i\n";
    for (const auto& [name, rank] : r.ranking)
        os << std::left << std::setw(static_cast<int>(width)) << name << "  " << std::fixed << std::setprecision(4)
           << rank << '\n';
    os << std::defaultfloat << std::setprecision(6) << "chi2 = " << r.result.chi2 << ", dof = " << r.result.dof
       << ", p = " << r.result.p_value << ", " << (r.result.reject_h0 ? "reject H0" : "fail to reject H0")
       << " at alpha = 0.05\n";
    return os.str();
}

}  // namespace afos::ranktest
