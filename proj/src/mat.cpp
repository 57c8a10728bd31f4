#include "msrl/mat.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "msrl/errors.hpp"

namespace msrl {

Mat Mat::identity(std::size_t n) {
    Mat m(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Mat Mat::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    Mat m(r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
        if (row.size() != c) throw data_error("Mat::from_rows: ragged initializer");
        std::size_t j = 0;
        for (double v : row) m(i, j++) = v;
        ++i;
    }
    return m;
}

Mat Mat::transpose() const {
    Mat t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

Mat Mat::col(std::size_t j) const {
    Mat c(rows_, 1);
    for (std::size_t i = 0; i < rows_; ++i) c(i, 0) = (*this)(i, j);
    return c;
}

void Mat::set_col(std::size_t j, const Mat& c) {
    for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = c(i, 0);
}

bool Mat::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

Mat read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open '" + path + "' for reading");
    std::vector<double> values;
    std::size_t cols = 0, rows = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t row_cols = 0;
        const char* s = line.c_str();
        while (true) {
            char* end = nullptr;
            double v = std::strtod(s, &end);
            if (end == s)
                throw data_error("'" + path + "': bad number at line " +
                                 std::to_string(rows + 1));
            values.push_back(v);
            ++row_cols;
            s = end;
            while (*s == ' ' || *s == '\t') ++s;
            if (*s == ',') { ++s; continue; }
            if (*s == '\0') break;
            throw data_error("'" + path + "': unexpected character at line " +
                             std::to_string(rows + 1));
        }
        if (cols == 0) cols = row_cols;
        if (row_cols != cols)
            throw data_error("'" + path + "': line " + std::to_string(rows + 1) +
                             " has " + std::to_string(row_cols) + " fields, expected " +
                             std::to_string(cols));
        ++rows;
    }
    if (rows == 0) throw data_error("'" + path + "': empty matrix file");
    Mat m(rows, cols);
    std::copy(values.begin(), values.end(), m.data());
    return m;
}

void write_csv(const Mat& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot open '" + path + "' for writing");
    char buf[64];
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
            out << buf;
            if (j + 1 < m.cols()) out << ',';
        }
        out << '\n';
    }
    if (!out) throw data_error("write failed for '" + path + "'");
}

} // namespace msrl
