#pragma once

#include "corrnet/date.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace corrnet {

/// Exchange-assigned industry group. The five groups of the Shanghai A sample
/// come first; anything else is carried as Other with its label kept on the
/// metadata entry.
enum class Industry { Energy, Finance, HealthCare, Industrial, Materials, Other };

std::string to_string(Industry industry);
/// Accepts "Energy", "Finance", "Health Care"/"HealthCare", "Industrial"/"Industrials",
/// "Materials"; anything else maps to Other.
Industry parse_industry(std::string_view text);

struct Observation {
    Date date;
    double close = 0.0;
    double dividend = 0.0;
};

/// Daily closes and cash dividends for one ticker, ordered by date.
struct PriceSeries {
    std::string ticker;
    Industry industry = Industry::Other;
    std::vector<Observation> observations;

    /// Throws ValidationError when dates are not strictly increasing,
    /// a close is not positive or a dividend is negative.
    void validate() const;
};

struct StudyPeriod {
    std::string label;
    Date start;
    Date end;
};

/// Contiguous periods sharing boundary dates: `boundaries.size() - 1` periods
/// labelled P1, P2, ...
std::vector<StudyPeriod> periods_from_boundaries(const std::vector<Date>& boundaries);

/// The four Shanghai A study periods (2005-05-13 .. 2010-10-19).
std::vector<StudyPeriod> default_periods();

struct MetadataEntry {
    std::string ticker;
    std::string code;
    Industry industry = Industry::Other;
    std::string industry_label;
};

/// Ticker -> industry lookup, kept in file order.
class Metadata {
public:
    Metadata() = default;
    explicit Metadata(std::vector<MetadataEntry> entries);

    const std::vector<MetadataEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    bool contains(const std::string& ticker) const;
    /// Throws ValidationError for an unknown ticker.
    const MetadataEntry& at(const std::string& ticker) const;
    /// Position of the ticker in file order.
    std::size_t index_of(const std::string& ticker) const;

private:
    std::vector<MetadataEntry> entries_;
};

/// Reads `ticker,code,industry`.
Metadata load_metadata(std::istream& in);
void write_metadata(std::ostream& out, const Metadata& metadata);

/// Reads the `date,ticker,close,dividend` schema (dividend column optional,
/// empty cells read as 0). Series come back in metadata order.
std::vector<PriceSeries> load_prices(std::istream& in, const Metadata& metadata);
void write_prices(std::ostream& out, const std::vector<PriceSeries>& series);

/// Windows of 5 trading days: values(w, t) is the simple return of ticker t
/// over window w, dividends included.
struct ReturnMatrix {
    struct Window {
        Date start;
        Date end;
    };
    std::vector<std::string> tickers;
    std::vector<Window> windows;
    Eigen::MatrixXd values;
};

/// Maximum share of union-grid dates a ticker may miss before it is rejected.
inline constexpr double kMaxMissingFraction = 0.05;
inline constexpr std::size_t kTradingDaysPerWindow = 5;

ReturnMatrix weekly_returns(const std::vector<PriceSeries>& series, const StudyPeriod& period);

/// Total return over the period with dividends reinvested at that day's close.
double period_total_return(const PriceSeries& series, const StudyPeriod& period);

/// Per-stock loadings of the synthetic factor model.
struct FactorLoading {
    Industry industry = Industry::Other;
    double industry_loading = 0.0;
    std::size_t cluster = 0;
    double cluster_loading = 0.0;
};

/// One stretch of synthetic history. Cluster factors are drawn afresh per
/// regime, so changing the cluster map between regimes moves stocks around.
struct Regime {
    std::size_t weeks = 0;
    std::vector<FactorLoading> loadings;
    double market_loading = 0.0;
    double drift = 0.0;
};

struct SyntheticSpec {
    std::vector<std::string> tickers; ///< empty: S000, S001, ...
    std::vector<Regime> regimes;
    Date start{2005, 5, 13};
    double start_price = 10.0;
    double factor_vol = 0.012;
    double idio_vol = 0.012;
    /// Annual cash yield paid once every 250 trading days; 0 disables dividends.
    double dividend_yield = 0.02;
};

/// Single-regime convenience: `structure` holds one loading per stock
/// (empty: all loadings zero).
std::vector<PriceSeries> generate_synthetic(std::size_t n_stocks, std::size_t n_weeks,
                                            const std::vector<FactorLoading>& structure,
                                            std::uint64_t seed);

/// Weekday trading calendar from `spec.start`; deterministic given `seed`.
std::vector<PriceSeries> generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

} // namespace corrnet
