#include "corrnet/corrdist.hpp"

#include "corrnet/error.hpp"
#include "csv.hpp"
#include "nexus_text.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

namespace corrnet {

CorrelationMatrix correlations(const ReturnMatrix& returns)
{
    const auto& x = returns.values;
    const Eigen::Index windows = x.rows();
    const Eigen::Index n = x.cols();
    if (windows < 3)
        throw ValidationError("correlations need at least 3 return windows");
    if (static_cast<std::size_t>(n) != returns.tickers.size())
        throw ValidationError("return matrix ticker count does not match its columns");

    Eigen::MatrixXd centred = x.rowwise() - x.colwise().mean();
    Eigen::VectorXd scale(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        scale(j) = centred.col(j).norm();
        // A constant column leaves only rounding noise after centring.
        const double noise = 64.0 * std::numeric_limits<double>::epsilon() * x.col(j).norm();
        if (!(scale(j) > noise))
            throw ValidationError(returns.tickers[static_cast<std::size_t>(j)] + ": zero variance returns");
    }

    CorrelationMatrix out{returns.tickers, Eigen::MatrixXd::Identity(n, n)};
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double r = std::clamp(centred.col(i).dot(centred.col(j)) / (scale(i) * scale(j)), -1.0, 1.0);
            out.rho(i, j) = r;
            out.rho(j, i) = r;
        }
    return out;
}

DistanceMatrix to_distance(const CorrelationMatrix& rho)
{
    const Eigen::Index n = rho.rho.rows();
    DistanceMatrix out{rho.tickers, Eigen::MatrixXd::Zero(n, n)};
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (i != j)
                out.d(i, j) = std::sqrt(std::max(0.0, 2.0 * (1.0 - rho.rho(i, j))));
    return out;
}

CorrelationSummary summarize(const CorrelationMatrix& rho)
{
    const Eigen::Index n = rho.rho.rows();
    if (n < 2)
        throw ValidationError("summary needs at least two tickers");
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            v.push_back(rho.rho(i, j));

    CorrelationSummary s;
    s.total_pairs = v.size();
    s.min = *std::min_element(v.begin(), v.end());
    s.max = *std::max_element(v.begin(), v.end());
    s.negative_count = static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [](double r) { return r < 0.0; }));
    double sum = 0.0;
    for (double r : v)
        sum += r;
    s.mean = sum / static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (double r : v)
            ss += (r - s.mean) * (r - s.mean);
        s.std_dev = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    return s;
}

void validate(const CorrelationMatrix& rho)
{
    const auto& m = rho.rho;
    if (m.rows() != m.cols() || static_cast<std::size_t>(m.rows()) != rho.tickers.size())
        throw ValidationError("correlation matrix must be square and labelled");
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (m(i, i) != 1.0)
            throw ValidationError("correlation diagonal must be 1");
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (std::abs(m(i, j) - m(j, i)) > 1e-12)
                throw ValidationError("correlation matrix is not symmetric");
            if (!(std::abs(m(i, j)) <= 1.0))
                throw ValidationError("correlation outside [-1, 1]");
        }
    }
}

void validate(const DistanceMatrix& dm)
{
    const auto& m = dm.d;
    if (m.rows() != m.cols() || static_cast<std::size_t>(m.rows()) != dm.tickers.size())
        throw ValidationError("distance matrix must be square and labelled");
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (m(i, i) != 0.0)
            throw ValidationError("distance diagonal must be 0");
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (std::abs(m(i, j) - m(j, i)) > 1e-12)
                throw ValidationError("distance matrix is not symmetric");
            if (!(m(i, j) >= 0.0) || !std::isfinite(m(i, j)))
                throw ValidationError("distances must be finite and non-negative");
        }
    }
}

void write_matrix_csv(std::ostream& out, const std::vector<std::string>& tickers, const Eigen::MatrixXd& m)
{
    out << "ticker";
    for (const auto& t : tickers)
        out << ',' << t;
    out << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out << tickers[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            out << ',' << csv::format(m(i, j));
        out << '\n';
    }
}

void read_matrix_csv(std::istream& in, std::vector<std::string>& tickers, Eigen::MatrixXd& m)
{
    std::string line;
    std::size_t line_no = 0;
    tickers.clear();
    while (std::getline(in, line)) {
        ++line_no;
        if (!csv::trim(line).empty())
            break;
    }
    auto header = csv::split(line);
    if (header.size() < 2)
        throw ParseError("matrix header must list tickers", line_no);
    for (std::size_t i = 1; i < header.size(); ++i)
        tickers.emplace_back(header[i]);
    const auto n = static_cast<Eigen::Index>(tickers.size());
    m.resize(n, n);
    Eigen::Index row = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty())
            continue;
        const auto fields = csv::split(line);
        if (row >= n || fields.size() != tickers.size() + 1)
            throw ParseError("unexpected matrix row", line_no);
        if (fields[0] != tickers[static_cast<std::size_t>(row)])
            throw ParseError("row label does not match header order", line_no);
        for (Eigen::Index j = 0; j < n; ++j) {
            const auto v = csv::to_double(fields[static_cast<std::size_t>(j) + 1]);
            if (!v)
                throw ParseError("bad matrix entry", line_no);
            m(row, j) = *v;
        }
        ++row;
    }
    if (row != n)
        throw ParseError("matrix has " + std::to_string(row) + " rows, expected " + std::to_string(n));
}

DistanceMatrix read_distance_csv(std::istream& in)
{
    DistanceMatrix d;
    read_matrix_csv(in, d.tickers, d.d);
    validate(d);
    return d;
}

void write_nexus_distances(std::ostream& out, const DistanceMatrix& d)
{
    nexus::write_taxa_block(out, d.tickers);
    out << "BEGIN Distances;\n";
    out << "DIMENSIONS ntax=" << d.size() << ";\n";
    out << "FORMAT labels=no diagonal triangle=both;\n";
    out << "MATRIX\n";
    for (Eigen::Index i = 0; i < d.d.rows(); ++i) {
        for (Eigen::Index j = 0; j < d.d.cols(); ++j)
            out << (j ? " " : "") << csv::format(d.d(i, j));
        out << '\n';
    }
    out << ";\nEND; [Distances]\n";
}

} // namespace corrnet
