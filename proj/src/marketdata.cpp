#include "corrnet/marketdata.hpp"

#include "corrnet/error.hpp"
#include "csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <set>

namespace corrnet {

std::string to_string(Industry industry)
{
    switch (industry) {
    case Industry::Energy: return "Energy";
    case Industry::Finance: return "Finance";
    case Industry::HealthCare: return "Health Care";
    case Industry::Industrial: return "Industrial";
    case Industry::Materials: return "Materials";
    case Industry::Other: break;
    }
    return "Other";
}

Industry parse_industry(std::string_view text)
{
    if (text == "Energy") return Industry::Energy;
    if (text == "Finance") return Industry::Finance;
    if (text == "Health Care" || text == "HealthCare") return Industry::HealthCare;
    if (text == "Industrial" || text == "Industrials") return Industry::Industrial;
    if (text == "Materials") return Industry::Materials;
    return Industry::Other;
}

void PriceSeries::validate() const
{
    for (std::size_t i = 0; i < observations.size(); ++i) {
        const auto& o = observations[i];
        if (!(o.close > 0.0))
            throw ValidationError(ticker + " " + o.date.iso() + ": close price must be positive");
        if (!(o.dividend >= 0.0))
            throw ValidationError(ticker + " " + o.date.iso() + ": dividend must be non-negative");
        if (i > 0 && !(observations[i - 1].date < o.date))
            throw ValidationError(ticker + " " + o.date.iso() + ": dates must be strictly increasing");
    }
}

std::vector<StudyPeriod> periods_from_boundaries(const std::vector<Date>& boundaries)
{
    if (boundaries.size() < 2)
        throw ValidationError("at least two period boundaries are required");
    std::vector<StudyPeriod> periods;
    for (std::size_t i = 0; i + 1 < boundaries.size(); ++i) {
        if (!(boundaries[i] < boundaries[i + 1]))
            throw ValidationError("period boundaries must be strictly increasing");
        periods.push_back({"P" + std::to_string(i + 1), boundaries[i], boundaries[i + 1]});
    }
    return periods;
}

std::vector<StudyPeriod> default_periods()
{
    return periods_from_boundaries({Date{2005, 5, 13}, Date{2006, 6, 13}, Date{2007, 10, 16},
                                    Date{2008, 10, 28}, Date{2010, 10, 19}});
}

Metadata::Metadata(std::vector<MetadataEntry> entries) : entries_(std::move(entries))
{
    std::set<std::string> seen;
    for (const auto& e : entries_)
        if (!seen.insert(e.ticker).second)
            throw ValidationError("duplicate ticker in metadata: " + e.ticker);
}

bool Metadata::contains(const std::string& ticker) const
{
    return std::any_of(entries_.begin(), entries_.end(),
                       [&](const MetadataEntry& e) { return e.ticker == ticker; });
}

std::size_t Metadata::index_of(const std::string& ticker) const
{
    for (std::size_t i = 0; i < entries_.size(); ++i)
        if (entries_[i].ticker == ticker)
            return i;
    throw ValidationError("unknown ticker: " + ticker);
}

const MetadataEntry& Metadata::at(const std::string& ticker) const
{
    return entries_[index_of(ticker)];
}

namespace {

struct Header {
    std::map<std::string, std::size_t, std::less<>> columns;

    std::optional<std::size_t> find(std::string_view name) const
    {
        auto it = columns.find(name);
        if (it == columns.end())
            return std::nullopt;
        return it->second;
    }
};

Header read_header(std::istream& in, std::size_t& line_no)
{
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty())
            continue;
        Header h;
        auto fields = csv::split(line);
        for (std::size_t i = 0; i < fields.size(); ++i)
            h.columns.emplace(std::string(fields[i]), i);
        return h;
    }
    throw ParseError("missing header row");
}

} // namespace

Metadata load_metadata(std::istream& in)
{
    std::size_t line_no = 0;
    const auto header = read_header(in, line_no);
    const auto ticker_col = header.find("ticker");
    const auto industry_col = header.find("industry");
    const auto code_col = header.find("code");
    if (!ticker_col || !industry_col)
        throw ParseError("metadata header must contain ticker and industry", line_no);

    std::vector<MetadataEntry> entries;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty())
            continue;
        const auto fields = csv::split(line);
        if (fields.size() != header.columns.size())
            throw ParseError("expected " + std::to_string(header.columns.size()) + " fields", line_no);
        MetadataEntry e;
        e.ticker = std::string(fields[*ticker_col]);
        e.industry_label = std::string(fields[*industry_col]);
        e.industry = parse_industry(e.industry_label);
        if (code_col)
            e.code = std::string(fields[*code_col]);
        if (e.ticker.empty())
            throw ParseError("empty ticker", line_no);
        entries.push_back(std::move(e));
    }
    return Metadata{std::move(entries)};
}

void write_metadata(std::ostream& out, const Metadata& metadata)
{
    out << "ticker,code,industry\n";
    for (const auto& e : metadata.entries())
        out << e.ticker << ',' << e.code << ','
            << (e.industry == Industry::Other ? e.industry_label : to_string(e.industry)) << '\n';
}

std::vector<PriceSeries> load_prices(std::istream& in, const Metadata& metadata)
{
    std::size_t line_no = 0;
    const auto header = read_header(in, line_no);
    const auto date_col = header.find("date");
    const auto ticker_col = header.find("ticker");
    const auto close_col = header.find("close");
    const auto dividend_col = header.find("dividend");
    if (!date_col || !ticker_col || !close_col)
        throw ParseError("price header must contain date, ticker and close", line_no);

    std::map<std::string, std::vector<Observation>> by_ticker;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty())
            continue;
        const auto fields = csv::split(line);
        if (fields.size() != header.columns.size())
            throw ParseError("expected " + std::to_string(header.columns.size()) + " fields", line_no);
        const auto date = Date::parse(fields[*date_col]);
        if (!date)
            throw ParseError("bad date '" + std::string(fields[*date_col]) + "'", line_no);
        const auto close = csv::to_double(fields[*close_col]);
        if (!close)
            throw ParseError("bad close '" + std::string(fields[*close_col]) + "'", line_no);
        double dividend = 0.0;
        if (dividend_col && !fields[*dividend_col].empty()) {
            const auto d = csv::to_double(fields[*dividend_col]);
            if (!d)
                throw ParseError("bad dividend '" + std::string(fields[*dividend_col]) + "'", line_no);
            dividend = *d;
        }
        std::string ticker(fields[*ticker_col]);
        if (!(*close > 0.0))
            throw ValidationError(ticker + " " + date->iso() + ": close price must be positive");
        if (!(dividend >= 0.0))
            throw ValidationError(ticker + " " + date->iso() + ": dividend must be non-negative");
        if (!metadata.contains(ticker))
            throw ValidationError("line " + std::to_string(line_no) + ": ticker " + ticker +
                                  " not in metadata");
        by_ticker[ticker].push_back({*date, *close, dividend});
    }

    std::vector<PriceSeries> out;
    for (const auto& entry : metadata.entries()) {
        auto it = by_ticker.find(entry.ticker);
        if (it == by_ticker.end())
            continue;
        PriceSeries s{entry.ticker, entry.industry, std::move(it->second)};
        std::stable_sort(s.observations.begin(), s.observations.end(),
                         [](const Observation& a, const Observation& b) { return a.date < b.date; });
        for (std::size_t i = 1; i < s.observations.size(); ++i)
            if (s.observations[i].date == s.observations[i - 1].date)
                throw ValidationError(s.ticker + " " + s.observations[i].date.iso() + ": duplicate date");
        out.push_back(std::move(s));
    }
    return out;
}

void write_prices(std::ostream& out, const std::vector<PriceSeries>& series)
{
    out << "date,ticker,close,dividend\n";
    for (const auto& s : series)
        for (const auto& o : s.observations)
            out << o.date.iso() << ',' << s.ticker << ',' << csv::format(o.close) << ','
                << csv::format(o.dividend) << '\n';
}

namespace {

std::vector<Observation> within(const PriceSeries& s, const StudyPeriod& p)
{
    std::vector<Observation> out;
    for (const auto& o : s.observations)
        if (!(o.date < p.start) && !(p.end < o.date))
            out.push_back(o);
    return out;
}

} // namespace

ReturnMatrix weekly_returns(const std::vector<PriceSeries>& series, const StudyPeriod& period)
{
    if (series.empty())
        throw ValidationError("no series to compute returns for");

    std::vector<std::vector<Observation>> obs;
    std::set<Date> grid_union;
    for (const auto& s : series) {
        obs.push_back(within(s, period));
        for (const auto& o : obs.back())
            grid_union.insert(o.date);
    }

    // A ticker may miss a small share of the union grid; those dates drop out
    // of the intersection for everyone.
    std::vector<Date> grid(grid_union.begin(), grid_union.end());
    for (std::size_t t = 0; t < series.size(); ++t) {
        const double missing = static_cast<double>(grid_union.size() - obs[t].size());
        if (obs[t].empty() || missing > kMaxMissingFraction * static_cast<double>(grid_union.size()))
            throw AlignmentError(series[t].ticker, "missing " + std::to_string(grid_union.size() - obs[t].size()) +
                                                       " of " + std::to_string(grid_union.size()) +
                                                       " trading dates in " + period.label);
        std::vector<Date> own;
        for (const auto& o : obs[t])
            own.push_back(o.date);
        std::vector<Date> kept;
        std::set_intersection(grid.begin(), grid.end(), own.begin(), own.end(), std::back_inserter(kept));
        grid.swap(kept);
    }
    if (grid.size() < kTradingDaysPerWindow + 1)
        throw ValidationError("period " + period.label + " has fewer than 6 shared trading dates");

    const std::size_t n_windows = (grid.size() - 1) / kTradingDaysPerWindow;
    ReturnMatrix rm;
    rm.values.resize(static_cast<Eigen::Index>(n_windows), static_cast<Eigen::Index>(series.size()));
    for (std::size_t w = 0; w < n_windows; ++w)
        rm.windows.push_back({grid[w * kTradingDaysPerWindow], grid[(w + 1) * kTradingDaysPerWindow]});

    for (std::size_t t = 0; t < series.size(); ++t) {
        rm.tickers.push_back(series[t].ticker);
        const auto& o = obs[t];
        auto close_on = [&](Date d) {
            auto it = std::lower_bound(o.begin(), o.end(), d,
                                       [](const Observation& a, Date b) { return a.date < b; });
            return it->close;
        };
        for (std::size_t w = 0; w < n_windows; ++w) {
            const auto& win = rm.windows[w];
            double dividends = 0.0;
            for (const auto& x : o)
                if (win.start < x.date && !(win.end < x.date))
                    dividends += x.dividend;
            rm.values(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(t)) =
                (close_on(win.end) + dividends) / close_on(win.start) - 1.0;
        }
    }
    return rm;
}

double period_total_return(const PriceSeries& series, const StudyPeriod& period)
{
    const auto o = within(series, period);
    if (o.empty())
        throw ValidationError(series.ticker + ": no price within " + period.label);
    double units = 1.0;
    for (std::size_t i = 1; i < o.size(); ++i)
        if (o[i].dividend > 0.0)
            units *= 1.0 + o[i].dividend / o[i].close;
    return units * o.back().close / o.front().close - 1.0;
}

std::vector<PriceSeries> generate_synthetic(std::size_t n_stocks, std::size_t n_weeks,
                                            const std::vector<FactorLoading>& structure,
                                            std::uint64_t seed)
{
    if (n_stocks < 4)
        throw ValidationError("synthetic data needs at least 4 stocks");
    if (n_weeks == 0)
        throw ValidationError("synthetic data needs a positive number of weeks");
    if (!structure.empty() && structure.size() != n_stocks)
        throw ValidationError("factor structure must give one loading per stock");
    SyntheticSpec spec;
    spec.regimes.push_back(
        {n_weeks, structure.empty() ? std::vector<FactorLoading>(n_stocks) : structure, 0.0, 0.0});
    return generate_synthetic(spec, seed);
}

std::vector<PriceSeries> generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed)
{
    if (spec.regimes.empty())
        throw ValidationError("synthetic spec has no regimes");
    const std::size_t n = spec.regimes.front().loadings.size();
    if (n < 4)
        throw ValidationError("synthetic data needs at least 4 stocks");
    if (!spec.tickers.empty() && spec.tickers.size() != n)
        throw ValidationError("synthetic spec ticker count does not match loadings");
    for (const auto& r : spec.regimes) {
        if (r.loadings.size() != n)
            throw ValidationError("every regime must load every stock");
        if (r.weeks == 0)
            throw ValidationError("synthetic data needs a positive number of weeks");
    }

    std::vector<PriceSeries> out(n);
    for (std::size_t s = 0; s < n; ++s) {
        if (spec.tickers.empty()) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "S%03zu", s);
            out[s].ticker = buf;
        } else {
            out[s].ticker = spec.tickers[s];
        }
        out[s].industry = spec.regimes.front().loadings[s].industry;
    }

    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal;

    Date day = spec.start;
    while (!day.is_weekday())
        day = day + 1;
    std::vector<double> price(n, spec.start_price);
    for (std::size_t s = 0; s < n; ++s)
        out[s].observations.push_back({day, price[s], 0.0});

    constexpr std::size_t kIndustries = 6;
    constexpr std::size_t kDividendCycle = 250;
    std::size_t t = 0;
    for (const auto& regime : spec.regimes) {
        std::size_t n_clusters = 0;
        for (const auto& l : regime.loadings)
            n_clusters = std::max(n_clusters, l.cluster + 1);
        std::vector<double> industry_f(kIndustries), cluster_f(n_clusters);
        for (std::size_t step = 0; step < regime.weeks * kTradingDaysPerWindow; ++step) {
            ++t;
            do
                day = day + 1;
            while (!day.is_weekday());
            const double market = normal(rng);
            for (auto& f : industry_f)
                f = normal(rng);
            for (auto& f : cluster_f)
                f = normal(rng);
            for (std::size_t s = 0; s < n; ++s) {
                const auto& l = regime.loadings[s];
                const double common = regime.market_loading * market +
                                      l.industry_loading * industry_f[static_cast<std::size_t>(l.industry)] +
                                      l.cluster_loading * cluster_f[l.cluster];
                const double r = regime.drift + spec.factor_vol * common + spec.idio_vol * normal(rng);
                price[s] *= std::exp(r);
                double dividend = 0.0;
                if (spec.dividend_yield > 0.0 && t % kDividendCycle == (s * 37) % kDividendCycle)
                    dividend = spec.dividend_yield * price[s];
                out[s].observations.push_back({day, price[s], dividend});
            }
        }
    }
    return out;
}

} // namespace corrnet
