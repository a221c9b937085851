#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace relp {

/// Row-major so a period's relatives are contiguous.
using RelativesTable = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// n periods x m assets of price relatives x_t = p_t / p_{t-1}.
///
/// Immutable after construction. Period indices used throughout the library are
/// 1-based counts: "period t" is row t-1 of the table, and an argument named `t`
/// means "rows 1..t have been observed".
class RelativesMatrix {
public:
    /// Validates the invariants (n >= 1, m >= 2, every entry > 0, finite) and
    /// throws DataError otherwise. Empty name vectors get default labels.
    explicit RelativesMatrix(RelativesTable values,
                             std::vector<std::string> asset_names = {},
                             std::vector<std::string> period_labels = {});

    std::size_t periods() const { return static_cast<std::size_t>(values_.rows()); }
    std::size_t assets() const { return static_cast<std::size_t>(values_.cols()); }

    const RelativesTable& values() const { return values_; }
    const std::vector<std::string>& asset_names() const { return asset_names_; }
    const std::vector<std::string>& period_labels() const { return period_labels_; }

    /// Relatives of period t (1-based).
    Eigen::VectorXd period(std::size_t t) const;

    double operator()(std::size_t row, std::size_t col) const { return values_(row, col); }

private:
    RelativesTable values_;
    std::vector<std::string> asset_names_;
    std::vector<std::string> period_labels_;
};

enum class CsvFormat { relatives, prices };

CsvFormat parse_csv_format(const std::string& name);
std::string to_string(CsvFormat format);

/// Loads a CSV of relatives or prices.
///
/// Layout: one row per period, one column per asset. A header row is detected
/// when its first non-label cell is not numeric; a label column is detected when
/// the first cell of the first data row is not numeric. For prices, row t of the
/// result is price row t divided elementwise by price row t-1.
RelativesMatrix load_relatives(const std::filesystem::path& path, CsvFormat format);

/// Parses CSV text directly (same rules as load_relatives).
RelativesMatrix parse_relatives(const std::string& text, CsvFormat format);

/// Writes a relatives CSV with a header row (and a label column when the matrix
/// carries period labels). Values use shortest round-trip formatting, so
/// write -> load reproduces every value bit for bit.
void write_relatives(const RelativesMatrix& mat, const std::filesystem::path& path);
std::string format_relatives(const RelativesMatrix& mat);

/// Rows end_t - width + 1 .. end_t (1-based, inclusive). Throws IndexError unless
/// 1 <= width <= end_t <= n.
RelativesMatrix slice_window(const RelativesMatrix& mat, std::size_t end_t, std::size_t width);

struct DatasetManifest {
    std::string name;
    std::string region;
    std::size_t rows = 0;
    std::size_t assets = 0;
    std::string source_path;

    /// Throws DataError when rows/assets disagree with the loaded matrix.
    void check_against(const RelativesMatrix& mat) const;
};

void to_json(nlohmann::json& j, const DatasetManifest& m);
void from_json(const nlohmann::json& j, DatasetManifest& m);

DatasetManifest load_manifest(const std::filesystem::path& path);

/// Loads the manifest's source (resolved relative to the manifest's directory
/// when not absolute) as csv_relatives and checks the declared shape.
RelativesMatrix load_from_manifest(const std::filesystem::path& manifest_path);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

}  // namespace relp
