#include "evsom/artifacts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "evsom/csv.hpp"

namespace evsom::artifacts {

using csv::format_full;

void write_fits_csv(const std::map<std::string, MarketModelFit>& fits,
                    const std::filesystem::path& path) {
    std::ostringstream out;
    out << "ticker,alpha,beta,sigma,dw,n,flags\n";
    for (const auto& [ticker, fit] : fits) {
        out << ticker << ',' << format_full(fit.alpha) << ',' << format_full(fit.beta) << ','
            << format_full(fit.sigma) << ',';
        if (!fit.perfect_fit) out << format_full(fit.dw);
        out << ',' << fit.n_obs << ',' << (fit.perfect_fit ? "perfect_fit" : "") << '\n';
    }
    csv::write_text_file(path, out.str());
}

std::map<std::string, FitSummary> read_fits_csv(const std::filesystem::path& path) {
    csv::File f = csv::read(path, {"ticker", "alpha", "beta", "sigma", "dw", "n", "flags"});
    std::map<std::string, FitSummary> fits;
    for (const csv::Row& r : f.rows) {
        FitSummary fit;
        fit.alpha = csv::parse_double(f, r, 1);
        fit.beta = csv::parse_double(f, r, 2);
        fit.sigma = csv::parse_double(f, r, 3);
        fit.perfect_fit = r.fields[6] == "perfect_fit";
        fit.dw = r.fields[4].empty() ? std::numeric_limits<double>::quiet_NaN()
                                     : csv::parse_double(f, r, 4);
        fit.n_obs = csv::parse_int(f, r, 5);
        if (!fits.emplace(r.fields[0], fit).second) {
            csv::fail(f, r, "duplicate ticker " + r.fields[0]);
        }
    }
    return fits;
}

void write_event_stats_csv(const std::map<std::string, EventStats>& stats,
                           const std::filesystem::path& path) {
    std::ostringstream out;
    out << "ticker,offset,ar,car,t_ar,t_car,det_ar,det_car\n";
    for (const auto& [ticker, es] : stats) {
        const int h = es.half_window();
        for (Eigen::Index tau = 0; tau < es.ar.size(); ++tau) {
            out << ticker << ',' << (static_cast<int>(tau) - h) << ',' << format_full(es.ar[tau])
                << ',' << format_full(es.car[tau]) << ',' << format_full(es.t_ar[tau]) << ','
                << format_full(es.t_car[tau]) << ','
                << (es.detected_ar[static_cast<std::size_t>(tau)] ? 1 : 0) << ','
                << (es.detected_car[static_cast<std::size_t>(tau)] ? 1 : 0) << '\n';
        }
    }
    csv::write_text_file(path, out.str());
}

std::map<std::string, EventStats> read_event_stats_csv(const std::filesystem::path& path) {
    csv::File f = csv::read(
        path, {"ticker", "offset", "ar", "car", "t_ar", "t_car", "det_ar", "det_car"});

    struct Entry {
        std::vector<int> offsets;
        std::vector<double> ar, car, t_ar, t_car;
        std::vector<bool> det_ar, det_car;
    };
    std::map<std::string, Entry> parsed;
    for (const csv::Row& r : f.rows) {
        Entry& e = parsed[r.fields[0]];
        e.offsets.push_back(csv::parse_int(f, r, 1));
        e.ar.push_back(csv::parse_double(f, r, 2));
        e.car.push_back(csv::parse_double(f, r, 3));
        e.t_ar.push_back(csv::parse_double(f, r, 4));
        e.t_car.push_back(csv::parse_double(f, r, 5));
        e.det_ar.push_back(csv::parse_int(f, r, 6) != 0);
        e.det_car.push_back(csv::parse_int(f, r, 7) != 0);
    }

    std::map<std::string, EventStats> stats;
    for (auto& [ticker, e] : parsed) {
        const int days = static_cast<int>(e.offsets.size());
        const int h = (days - 1) / 2;
        for (int k = 0; k < days; ++k) {
            if (e.offsets[static_cast<std::size_t>(k)] != k - h) {
                throw std::runtime_error(path.string() + ": offsets for " + ticker +
                                         " are not contiguous from -" + std::to_string(h));
            }
        }
        EventStats es;
        es.ticker = ticker;
        es.ar = Eigen::Map<Eigen::VectorXd>(e.ar.data(), days);
        es.car = Eigen::Map<Eigen::VectorXd>(e.car.data(), days);
        es.t_ar = Eigen::Map<Eigen::VectorXd>(e.t_ar.data(), days);
        es.t_car = Eigen::Map<Eigen::VectorXd>(e.t_car.data(), days);
        es.detected_ar = e.det_ar;
        es.detected_car = e.det_car;
        stats.emplace(ticker, std::move(es));
    }
    return stats;
}

void write_table2_csv(const DetectionTable& table, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "offset,pct_car,pct_ar\n";
    for (Eigen::Index tau = 0; tau < table.pct_ar.size(); ++tau) {
        out << (static_cast<int>(tau) - table.half_window) << ',' << format_full(table.pct_car[tau])
            << ',' << format_full(table.pct_ar[tau]) << '\n';
    }
    csv::write_text_file(path, out.str());
}

DetectionTable read_table2_csv(const std::filesystem::path& path) {
    csv::File f = csv::read(path, {"offset", "pct_car", "pct_ar"});
    DetectionTable table;
    const int days = static_cast<int>(f.rows.size());
    table.half_window = (days - 1) / 2;
    table.pct_car.resize(days);
    table.pct_ar.resize(days);
    for (int k = 0; k < days; ++k) {
        const csv::Row& r = f.rows[static_cast<std::size_t>(k)];
        if (csv::parse_int(f, r, 0) != k - table.half_window) {
            csv::fail(f, r, "offsets out of order");
        }
        table.pct_car[k] = csv::parse_double(f, r, 1);
        table.pct_ar[k] = csv::parse_double(f, r, 2);
    }
    return table;
}

namespace {

std::vector<std::string> offset_headers(int half_window) {
    std::vector<std::string> heads;
    for (int off = -half_window; off <= half_window; ++off) {
        heads.push_back(off < 0 ? "d_m" + std::to_string(-off) : "d_p" + std::to_string(off));
    }
    return heads;
}

}  // namespace

void write_detection_grid_csv(const std::vector<DetectionGridRow>& rows, int half_window,
                              const std::filesystem::path& path) {
    std::ostringstream out;
    out << "level,rank,id,kind";
    for (const std::string& h : offset_headers(half_window)) out << ',' << h;
    out << '\n';
    for (const DetectionGridRow& row : rows) {
        out << row.level << ',' << row.rank << ',' << row.id << ',' << to_string(row.kind);
        for (int v : row.detected) out << ',' << v;
        out << '\n';
    }
    csv::write_text_file(path, out.str());
}

std::vector<DetectionGridRow> read_detection_grid_csv(const std::filesystem::path& path,
                                                      int* half_window) {
    csv::File f = csv::read_any(path);
    if (f.header.size() < 5 || f.header[0] != "level" || f.header[1] != "rank" ||
        f.header[2] != "id" || f.header[3] != "kind") {
        throw std::runtime_error(path.string() + ":1: unexpected detection grid header");
    }
    const int days = static_cast<int>(f.header.size()) - 4;
    const int h = (days - 1) / 2;
    if (offset_headers(h) !=
        std::vector<std::string>(f.header.begin() + 4, f.header.end())) {
        throw std::runtime_error(path.string() + ":1: unexpected offset columns");
    }
    if (half_window) *half_window = h;

    std::vector<DetectionGridRow> rows;
    for (const csv::Row& r : f.rows) {
        if (static_cast<int>(r.fields.size()) != days + 4) {
            csv::fail(f, r, "wrong field count");
        }
        DetectionGridRow row;
        row.level = r.fields[0];
        row.rank = csv::parse_int(f, r, 1);
        row.id = r.fields[2];
        row.kind = stat_kind_from(r.fields[3]);
        for (int k = 0; k < days; ++k) row.detected.push_back(csv::parse_int(f, r, 4 + k));
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_plane_csv(const CellGrid& grid, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "i,j,value,count\n";
    for (int i = 0; i < grid.rows; ++i) {
        for (int j = 0; j < grid.cols; ++j) {
            out << i << ',' << j << ',';
            if (grid.occupied(i, j)) out << format_full(grid.values(i, j));
            out << ',' << grid.counts(i, j) << '\n';
        }
    }
    csv::write_text_file(path, out.str());
}

CellGrid read_plane_csv(const std::filesystem::path& path) {
    csv::File f = csv::read(path, {"i", "j", "value", "count"});
    int max_i = -1, max_j = -1;
    for (const csv::Row& r : f.rows) {
        max_i = std::max(max_i, csv::parse_int(f, r, 0));
        max_j = std::max(max_j, csv::parse_int(f, r, 1));
    }
    CellGrid grid;
    grid.rows = max_i + 1;
    grid.cols = max_j + 1;
    grid.values = Eigen::MatrixXd::Zero(grid.rows, grid.cols);
    grid.counts = Eigen::MatrixXi::Zero(grid.rows, grid.cols);
    for (const csv::Row& r : f.rows) {
        const int i = csv::parse_int(f, r, 0);
        const int j = csv::parse_int(f, r, 1);
        grid.counts(i, j) = csv::parse_int(f, r, 3);
        if (!r.fields[2].empty()) grid.values(i, j) = csv::parse_double(f, r, 2);
    }
    return grid;
}

void write_features_csv(const std::vector<std::string>& tickers, const Eigen::MatrixXd& values,
                        const std::vector<std::string>& column_names,
                        const std::filesystem::path& path) {
    std::ostringstream out;
    out << "ticker";
    for (const std::string& c : column_names) out << ',' << c;
    out << '\n';
    for (std::size_t k = 0; k < tickers.size(); ++k) {
        out << tickers[k];
        for (Eigen::Index c = 0; c < values.cols(); ++c) {
            out << ',' << format_full(values(static_cast<Eigen::Index>(k), c));
        }
        out << '\n';
    }
    csv::write_text_file(path, out.str());
}

FeatureTable read_features_csv(const std::filesystem::path& path) {
    csv::File f = csv::read_any(path);
    if (f.header.empty() || f.header[0] != "ticker") {
        throw std::runtime_error(path.string() + ":1: expected 'ticker' as first column");
    }
    FeatureTable table;
    table.column_names.assign(f.header.begin() + 1, f.header.end());
    const int dim = static_cast<int>(table.column_names.size());
    table.values.resize(static_cast<Eigen::Index>(f.rows.size()), dim);
    for (std::size_t k = 0; k < f.rows.size(); ++k) {
        const csv::Row& r = f.rows[k];
        if (static_cast<int>(r.fields.size()) != dim + 1) csv::fail(f, r, "wrong field count");
        table.tickers.push_back(r.fields[0]);
        for (int c = 0; c < dim; ++c) {
            table.values(static_cast<Eigen::Index>(k), c) = csv::parse_double(f, r, c + 1);
        }
    }
    return table;
}

void write_feature_meta_csv(const FeatureMatrix& fm, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "column,mean,std,constant\n";
    for (int c = 0; c < fm.dim(); ++c) {
        out << fm.column_names[static_cast<std::size_t>(c)] << ',' << format_full(fm.column_means[c])
            << ',' << format_full(fm.column_stds[c]) << ','
            << (fm.constant_flag[static_cast<std::size_t>(c)] ? 1 : 0) << '\n';
    }
    csv::write_text_file(path, out.str());
}

FeatureMatrix read_feature_matrix(const std::filesystem::path& std_csv,
                                  const std::filesystem::path& meta_csv) {
    FeatureTable table = read_features_csv(std_csv);
    csv::File meta = csv::read(meta_csv, {"column", "mean", "std", "constant"});
    if (meta.rows.size() != table.column_names.size()) {
        throw std::runtime_error(meta_csv.string() + ": column count differs from features file");
    }
    FeatureMatrix fm;
    fm.tickers = std::move(table.tickers);
    fm.values = std::move(table.values);
    fm.column_names = std::move(table.column_names);
    fm.column_means.resize(static_cast<Eigen::Index>(meta.rows.size()));
    fm.column_stds.resize(static_cast<Eigen::Index>(meta.rows.size()));
    fm.constant_flag.assign(meta.rows.size(), false);
    for (std::size_t c = 0; c < meta.rows.size(); ++c) {
        const csv::Row& r = meta.rows[c];
        if (r.fields[0] != fm.column_names[c]) {
            csv::fail(meta, r, "column order differs from features file");
        }
        fm.column_means[static_cast<Eigen::Index>(c)] = csv::parse_double(meta, r, 1);
        fm.column_stds[static_cast<Eigen::Index>(c)] = csv::parse_double(meta, r, 2);
        fm.constant_flag[c] = csv::parse_int(meta, r, 3) != 0;
    }
    return fm;
}

void write_som_refs_csv(const SomMap& map, const std::vector<std::string>& column_names,
                        const std::filesystem::path& path) {
    std::ostringstream out;
    out << "i,j";
    for (const std::string& c : column_names) out << ',' << c;
    out << '\n';
    for (int c = 0; c < map.cells(); ++c) {
        auto [i, j] = map.cell_coords(c);
        out << i << ',' << j;
        for (Eigen::Index d = 0; d < map.refs.cols(); ++d) {
            out << ',' << format_full(map.refs(c, d));
        }
        out << '\n';
    }
    csv::write_text_file(path, out.str());
}

void write_som_labels_csv(const SomMap& map, const std::vector<std::string>& tickers,
                          const std::filesystem::path& path) {
    if (tickers.size() != map.labels.size()) {
        throw std::invalid_argument("write_som_labels_csv: tickers do not align with labels");
    }
    std::ostringstream out;
    out << "ticker,i,j,distance\n";
    for (std::size_t k = 0; k < tickers.size(); ++k) {
        auto [i, j] = map.cell_coords(map.labels[k]);
        out << tickers[k] << ',' << i << ',' << j << ','
            << format_full(map.bmu_distance[static_cast<Eigen::Index>(k)]) << '\n';
    }
    csv::write_text_file(path, out.str());
}

void write_som_error_csv(const SomMap& map, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "t,e\n";
    for (Eigen::Index t = 0; t < map.error_history.size(); ++t) {
        out << (t + 1) << ',' << format_full(map.error_history[t]) << '\n';
    }
    csv::write_text_file(path, out.str());
}

SomMap read_som_map(const std::filesystem::path& refs_csv, const std::filesystem::path& labels_csv,
                    const std::vector<std::string>& tickers) {
    csv::File rf = csv::read_any(refs_csv);
    if (rf.header.size() < 3 || rf.header[0] != "i" || rf.header[1] != "j") {
        throw std::runtime_error(refs_csv.string() + ":1: unexpected header");
    }
    const int dim = static_cast<int>(rf.header.size()) - 2;
    int rows = 0, cols = 0;
    for (const csv::Row& r : rf.rows) {
        rows = std::max(rows, csv::parse_int(rf, r, 0) + 1);
        cols = std::max(cols, csv::parse_int(rf, r, 1) + 1);
    }
    SomMap map;
    map.rows = rows;
    map.cols = cols;
    map.refs.resize(rows * cols, dim);
    if (static_cast<int>(rf.rows.size()) != rows * cols) {
        throw std::runtime_error(refs_csv.string() + ": missing cells");
    }
    for (const csv::Row& r : rf.rows) {
        const int c = map.cell_index(csv::parse_int(rf, r, 0), csv::parse_int(rf, r, 1));
        for (int d = 0; d < dim; ++d) map.refs(c, d) = csv::parse_double(rf, r, d + 2);
    }

    csv::File lf = csv::read(labels_csv, {"ticker", "i", "j", "distance"});
    std::map<std::string, std::pair<int, double>> by_ticker;
    for (const csv::Row& r : lf.rows) {
        by_ticker[r.fields[0]] = {map.cell_index(csv::parse_int(lf, r, 1), csv::parse_int(lf, r, 2)),
                                  csv::parse_double(lf, r, 3)};
    }
    if (by_ticker.size() != tickers.size()) {
        throw std::runtime_error(labels_csv.string() + ": ticker set differs from features file");
    }
    map.labels.resize(tickers.size());
    map.bmu_distance.resize(static_cast<Eigen::Index>(tickers.size()));
    for (std::size_t k = 0; k < tickers.size(); ++k) {
        auto it = by_ticker.find(tickers[k]);
        if (it == by_ticker.end()) {
            throw std::runtime_error(labels_csv.string() + ": missing ticker " + tickers[k]);
        }
        map.labels[k] = it->second.first;
        map.bmu_distance[static_cast<Eigen::Index>(k)] = it->second.second;
    }
    return map;
}

}  // namespace evsom::artifacts
