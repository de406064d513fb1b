#include "lagr/io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>

namespace lagr {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& cell, const std::string& path, std::size_t row,
                    const std::string& column) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end == cell.c_str() || *end != '\0' || errno == ERANGE)
        fail(ErrorKind::Parse, path + ": row " + std::to_string(row) + ", column '" + column +
                                   "': cannot parse '" + cell + "' as a number");
    return v;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::Io, "cannot open '" + path + "' for writing");
    return out;
}

}  // namespace

int CsvTable::column(const std::string& name, const std::string& path) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    fail(ErrorKind::Schema, path + ": missing required column '" + name + "'");
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open '" + path + "' for reading");
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) fail(ErrorKind::Parse, path + ": empty file (no header row)");
    table.header = split_line(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> row = split_line(line);
        if (row.size() != table.header.size())
            fail(ErrorKind::Parse, path + ": row " + std::to_string(table.rows.size() + 1) +
                                       " has " + std::to_string(row.size()) +
                                       " fields, expected " +
                                       std::to_string(table.header.size()));
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::string format_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

Dataset load_dataset(const std::string& path, const DatasetSchema& schema) {
    const CsvTable table = read_csv(path);
    const int cu = table.column(schema.x_col, path);
    const int cv = table.column(schema.y_col, path);
    const int cy = table.column(schema.response_col, path);
    std::vector<int> cx;
    for (const std::string& name : schema.covariate_cols)
        cx.push_back(table.column(name, path));
    if (cx.empty()) fail(ErrorKind::Schema, path + ": no covariate columns requested");

    const int n = static_cast<int>(table.rows.size());
    if (n == 0) fail(ErrorKind::Parse, path + ": no data rows");

    Dataset d;
    d.locations.reserve(n);
    d.X.resize(n, static_cast<int>(cx.size()));
    d.y.resize(n);
    for (int i = 0; i < n; ++i) {
        const auto& row = table.rows[i];
        d.locations.push_back({parse_double(row[cu], path, i + 1, schema.x_col),
                               parse_double(row[cv], path, i + 1, schema.y_col)});
        d.y[i] = parse_double(row[cy], path, i + 1, schema.response_col);
        for (std::size_t j = 0; j < cx.size(); ++j)
            d.X(i, static_cast<int>(j)) =
                parse_double(row[cx[j]], path, i + 1, schema.covariate_cols[j]);
    }
    d.covariate_names = schema.covariate_cols;
    d.intercept_included = false;
    Dataset with = d.with_intercept();
    with.validate();
    return with;
}

void write_dataset_csv(const std::string& path, const Dataset& dataset,
                       const DatasetSchema& schema) {
    std::ofstream out = open_out(path);
    const int skip = dataset.intercept_included ? 1 : 0;
    out << schema.x_col << ',' << schema.y_col << ',' << schema.response_col;
    for (int j = skip; j < dataset.p(); ++j) out << ',' << dataset.covariate_names[j];
    out << '\n';
    for (int i = 0; i < dataset.n(); ++i) {
        out << format_g17(dataset.locations[i].u) << ',' << format_g17(dataset.locations[i].v)
            << ',' << format_g17(dataset.y[i]);
        for (int j = skip; j < dataset.p(); ++j) out << ',' << format_g17(dataset.X(i, j));
        out << '\n';
    }
}

void write_surface_csv(const std::string& path, const CoefficientSurface& surface) {
    std::ofstream out = open_out(path);
    out << "u,v,coefficient,estimate,gradient_u,gradient_v,active,lambda,df_hat,converged\n";
    for (const LocationFit& f : surface.fits) {
        if (!f.ok) continue;
        for (int j = 0; j < surface.layout.p; ++j) {
            const Eigen::Vector3d g = f.fit.zeta_hat.group(j);
            out << format_g17(f.s.u) << ',' << format_g17(f.s.v) << ',' << surface.names[j]
                << ',' << format_g17(g[0]) << ',' << format_g17(g[1]) << ','
                << format_g17(g[2]) << ',' << (f.fit.active[j] ? 1 : 0) << ','
                << format_g17(f.fit.lambda) << ',' << format_g17(f.df_hat) << ','
                << (f.fit.converged ? 1 : 0) << '\n';
        }
    }
}

void write_tuning_path_csv(const std::string& path, const CoefficientSurface& surface) {
    std::ofstream out = open_out(path);
    out << "location,u,v,lambda,df_hat,weighted_deviance,aic,selected\n";
    for (std::size_t i = 0; i < surface.fits.size(); ++i) {
        const LocationFit& f = surface.fits[i];
        if (!f.ok) continue;
        for (const PathPoint& pt : f.path) {
            out << i << ',' << format_g17(f.s.u) << ',' << format_g17(f.s.v) << ','
                << format_g17(pt.lambda) << ',' << format_g17(pt.df_hat) << ','
                << format_g17(pt.weighted_deviance) << ',' << format_g17(pt.aic) << ','
                << (pt.lambda == f.fit.lambda ? 1 : 0) << '\n';
        }
    }
}

void write_study_csv(const std::string& path, const std::vector<CellMetrics>& table) {
    std::ofstream out = open_out(path);
    out << "n,rho,sigma_eps,method,coefficient,mise,zero_freq\n";
    for (const CellMetrics& cell : table) {
        for (int j = 0; j < 4; ++j) {
            out << cell.n << ',' << format_g17(cell.rho) << ',' << format_g17(cell.sigma_eps)
                << ',' << cell.method << ",beta" << (j + 1) << ','
                << format_g17(cell.mise[j]) << ',' << format_g17(cell.zero_freq[j]) << '\n';
        }
    }
}

std::uint64_t fnv1a_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open '" + path + "' for hashing");
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    char buf[16384];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 0x100000001b3ULL;
        }
        if (got < static_cast<std::streamsize>(sizeof(buf))) break;
    }
    return hash;
}

std::vector<SurfaceRow> read_surface_csv(const std::string& path) {
    const CsvTable table = read_csv(path);
    const int cu = table.column("u", path);
    const int cv = table.column("v", path);
    const int cname = table.column("coefficient", path);
    const int cest = table.column("estimate", path);
    const int cgu = table.column("gradient_u", path);
    const int cgv = table.column("gradient_v", path);

    std::vector<SurfaceRow> rows;
    std::map<std::pair<double, double>, std::size_t> index;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& r = table.rows[i];
        const double u = parse_double(r[cu], path, i + 1, "u");
        const double v = parse_double(r[cv], path, i + 1, "v");
        const auto key = std::make_pair(u, v);
        auto it = index.find(key);
        if (it == index.end()) {
            it = index.emplace(key, rows.size()).first;
            rows.push_back(SurfaceRow{{u, v}, {}, {}});
        }
        SurfaceRow& row = rows[it->second];
        row.names.push_back(r[cname]);
        row.groups.emplace_back(parse_double(r[cest], path, i + 1, "estimate"),
                                parse_double(r[cgu], path, i + 1, "gradient_u"),
                                parse_double(r[cgv], path, i + 1, "gradient_v"));
    }
    return rows;
}

}  // namespace lagr
