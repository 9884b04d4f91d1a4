#pragma once

// Friedman rank test across activation functions (rows) and blocks
// (networks or datasets, columns).

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace afos::ranktest {

struct AccuracyTable {
    std::vector<std::string> rows;     // function names
    std::vector<std::string> columns;  // networks or datasets
    std::vector<std::vector<double>> cells;  // cells[row][column]

    std::size_t n_a() const { return rows.size(); }
    std::size_t n_m() const { return columns.size(); }
    // Throws DataError unless the table is rectangular and finite.
    void check() const;
};

// Header row holds the column labels, first column the function names.
AccuracyTable read_csv(std::istream& in);
AccuracyTable read_csv(const std::filesystem::path& path);

using RankMatrix = std::vector<std::vector<double>>;  // [row][column]

// Per column, rank 1 for the lowest accuracy; ties share their average rank.
RankMatrix rank_columns(const AccuracyTable& table);

enum class DofMode { paper, standard };

struct FriedmanResult {
    RankMatrix ranks;
    std::vector<double> mean_ranks;  // R_i
    double chi2 = 0.0;
    int dof = 0;
    double p_value = 1.0;
    bool reject_h0 = false;
};

FriedmanResult friedman(const RankMatrix& ranks, DofMode mode = DofMode::paper);
// Statistic from average ranks alone.
double friedman_chi2(const std::vector<double>& mean_ranks, std::size_t n_m);

// Regularized upper incomplete gamma Q(a, x).
double gamma_q(double a, double x);
// Upper tail of the chi-square distribution.
double chi2_sf(double chi2, int dof);

struct Report {
    FriedmanResult result;
    std::vector<std::pair<std::string, double>> ranking;  // by descending R_i
};

Report compare_report(const AccuracyTable& table, DofMode mode = DofMode::paper);

std::string to_json(const Report& r);
std::string to_text(const Report& r);

}  // namespace afos::ranktest
