#include "relp/market_data.hpp"

#include "relp/errors.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

namespace relp {

DataError::DataError(const std::string& what, std::size_t row, std::size_t col)
    : Error(row == npos ? what
                        : what + " (row " + std::to_string(row) +
                              (col == npos ? "" : ", col " + std::to_string(col)) + ")"),
      row_(row),
      col_(col) {}

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '"')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' || s[e - 1] == '"')) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        if (pos == std::string::npos) {
            cells.push_back(trim(std::string_view(line).substr(start)));
            break;
        }
        cells.push_back(trim(std::string_view(line).substr(start, pos - start)));
        start = pos + 1;
    }
    return cells;
}

bool parse_number(const std::string& cell, double& out) {
    if (cell.empty()) return false;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

bool is_numeric(const std::string& cell) {
    double v = 0.0;
    return parse_number(cell, v);
}

struct ParsedGrid {
    std::vector<std::string> header;
    std::vector<std::string> labels;
    std::vector<std::vector<double>> rows;
};

ParsedGrid parse_grid(const std::string& text) {
    std::vector<std::vector<std::string>> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        lines.push_back(split_line(line));
    }
    if (lines.empty()) throw DataError("empty file");

    ParsedGrid grid;
    std::size_t first_data = 0;

    // Label column: first cell of the first data row is non-numeric. Decide the
    // header first by looking at the last cell of row 0, which is never a label.
    const bool header = !is_numeric(lines[0].back());
    if (header) first_data = 1;
    if (first_data >= lines.size()) throw DataError("no data rows");
    const bool label_col = !is_numeric(lines[first_data].front());

    const std::size_t skip = label_col ? 1 : 0;
    if (header) {
        for (std::size_t c = skip; c < lines[0].size(); ++c) grid.header.push_back(lines[0][c]);
    }

    std::size_t width = 0;
    for (std::size_t r = first_data; r < lines.size(); ++r) {
        const auto& cells = lines[r];
        const std::size_t data_row = r - first_data;
        if (cells.size() <= skip) throw DataError("row has no values", data_row);
        const std::size_t cols = cells.size() - skip;
        if (data_row == 0) {
            width = cols;
        } else if (cols != width) {
            throw DataError("ragged row: expected " + std::to_string(width) + " values, got " +
                                std::to_string(cols),
                            data_row);
        }
        if (label_col) grid.labels.push_back(cells[0]);
        std::vector<double> values(cols);
        for (std::size_t c = 0; c < cols; ++c) {
            if (!parse_number(cells[c + skip], values[c])) {
                throw DataError("non-numeric cell '" + cells[c + skip] + "'", data_row, c);
            }
        }
        grid.rows.push_back(std::move(values));
    }
    if (header && grid.header.size() != width) {
        throw DataError("header has " + std::to_string(grid.header.size()) + " names for " +
                        std::to_string(width) + " columns");
    }
    return grid;
}

void check_positive(const std::vector<std::vector<double>>& rows) {
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            const double v = rows[r][c];
            if (!std::isfinite(v) || v <= 0.0) {
                throw DataError("entry must be positive and finite", r, c);
            }
        }
    }
}

}  // namespace

std::string format_double(double value) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), ptr);
}

RelativesMatrix::RelativesMatrix(RelativesTable values, std::vector<std::string> asset_names,
                                 std::vector<std::string> period_labels)
    : values_(std::move(values)),
      asset_names_(std::move(asset_names)),
      period_labels_(std::move(period_labels)) {
    if (values_.rows() < 1) throw DataError("relatives matrix needs at least one period");
    if (values_.cols() < 2) throw DataError("relatives matrix needs at least two assets");
    for (Eigen::Index r = 0; r < values_.rows(); ++r) {
        for (Eigen::Index c = 0; c < values_.cols(); ++c) {
            const double v = values_(r, c);
            if (!std::isfinite(v) || v <= 0.0) {
                throw DataError("price relative must be positive and finite",
                                static_cast<std::size_t>(r), static_cast<std::size_t>(c));
            }
        }
    }
    if (asset_names_.empty()) {
        for (Eigen::Index c = 0; c < values_.cols(); ++c) {
            asset_names_.push_back("asset" + std::to_string(c + 1));
        }
    } else if (asset_names_.size() != assets()) {
        throw DataError("asset name count does not match column count");
    }
    if (!period_labels_.empty() && period_labels_.size() != periods()) {
        throw DataError("period label count does not match row count");
    }
}

Eigen::VectorXd RelativesMatrix::period(std::size_t t) const {
    if (t < 1 || t > periods()) throw IndexError("period " + std::to_string(t) + " out of range");
    return values_.row(static_cast<Eigen::Index>(t - 1)).transpose();
}

CsvFormat parse_csv_format(const std::string& name) {
    if (name == "csv_relatives" || name == "relatives") return CsvFormat::relatives;
    if (name == "csv_prices" || name == "prices") return CsvFormat::prices;
    throw ConfigError("unknown data format '" + name + "' (expected csv_relatives or csv_prices)");
}

std::string to_string(CsvFormat format) {
    return format == CsvFormat::relatives ? "csv_relatives" : "csv_prices";
}

RelativesMatrix parse_relatives(const std::string& text, CsvFormat format) {
    ParsedGrid grid = parse_grid(text);
    check_positive(grid.rows);
    const std::size_t m = grid.rows.front().size();
    if (m < 2) throw DataError("at least two asset columns are required");

    if (format == CsvFormat::relatives) {
        RelativesTable values(static_cast<Eigen::Index>(grid.rows.size()), static_cast<Eigen::Index>(m));
        for (std::size_t r = 0; r < grid.rows.size(); ++r) {
            for (std::size_t c = 0; c < m; ++c) values(r, c) = grid.rows[r][c];
        }
        return RelativesMatrix(std::move(values), std::move(grid.header), std::move(grid.labels));
    }

    if (grid.rows.size() < 2) throw DataError("price file needs at least two rows");
    const std::size_t n = grid.rows.size() - 1;
    RelativesTable values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < m; ++c) values(r, c) = grid.rows[r + 1][c] / grid.rows[r][c];
    }
    std::vector<std::string> labels;
    if (!grid.labels.empty()) labels.assign(grid.labels.begin() + 1, grid.labels.end());
    return RelativesMatrix(std::move(values), std::move(grid.header), std::move(labels));
}

RelativesMatrix load_relatives(const std::filesystem::path& path, CsvFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_relatives(buf.str(), format);
}

std::string format_relatives(const RelativesMatrix& mat) {
    std::string out;
    const bool labels = !mat.period_labels().empty();
    if (labels) out += "date,";
    for (std::size_t c = 0; c < mat.assets(); ++c) {
        if (c) out += ',';
        out += mat.asset_names()[c];
    }
    out += '\n';
    for (std::size_t r = 0; r < mat.periods(); ++r) {
        if (labels) {
            out += mat.period_labels()[r];
            out += ',';
        }
        for (std::size_t c = 0; c < mat.assets(); ++c) {
            if (c) out += ',';
            out += format_double(mat(r, c));
        }
        out += '\n';
    }
    return out;
}

void write_relatives(const RelativesMatrix& mat, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << format_relatives(mat);
}

RelativesMatrix slice_window(const RelativesMatrix& mat, std::size_t end_t, std::size_t width) {
    if (width < 1 || width > end_t || end_t > mat.periods()) {
        throw IndexError("window (end_t=" + std::to_string(end_t) + ", width=" + std::to_string(width) +
                         ") outside 1.." + std::to_string(mat.periods()));
    }
    const auto first = static_cast<Eigen::Index>(end_t - width);
    RelativesTable block = mat.values().middleRows(first, static_cast<Eigen::Index>(width));
    std::vector<std::string> labels;
    if (!mat.period_labels().empty()) {
        labels.assign(mat.period_labels().begin() + first, mat.period_labels().begin() + first + width);
    }
    return RelativesMatrix(std::move(block), mat.asset_names(), std::move(labels));
}

void to_json(nlohmann::json& j, const DatasetManifest& m) {
    j = nlohmann::json{{"name", m.name},
                       {"region", m.region},
                       {"rows", m.rows},
                       {"assets", m.assets},
                       {"source_path", m.source_path}};
}

void from_json(const nlohmann::json& j, DatasetManifest& m) {
    try {
        j.at("name").get_to(m.name);
        m.region = j.value("region", std::string{});
        j.at("rows").get_to(m.rows);
        j.at("assets").get_to(m.assets);
        j.at("source_path").get_to(m.source_path);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("invalid manifest: ") + e.what());
    }
}

void DatasetManifest::check_against(const RelativesMatrix& mat) const {
    if (mat.periods() != rows || mat.assets() != assets) {
        throw DataError("manifest '" + name + "' declares " + std::to_string(rows) + "x" +
                        std::to_string(assets) + " but data is " + std::to_string(mat.periods()) +
                        "x" + std::to_string(mat.assets()));
    }
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open manifest '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("manifest is not valid JSON: ") + e.what());
    }
    return j.get<DatasetManifest>();
}

RelativesMatrix load_from_manifest(const std::filesystem::path& manifest_path) {
    const DatasetManifest manifest = load_manifest(manifest_path);
    std::filesystem::path source(manifest.source_path);
    if (source.is_relative()) source = manifest_path.parent_path() / source;
    RelativesMatrix mat = load_relatives(source, CsvFormat::relatives);
    manifest.check_against(mat);
    return mat;
}

}  // namespace relp
