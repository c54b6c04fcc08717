#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rkhs/error.hpp"
#include "rkhs/kernel.hpp"

namespace rkhs {

inline constexpr const char* kReportFormat = "rkhs-report/1";

/// Line-oriented experiment record.
///
///     format = rkhs-report/1
///     experiment = <name>
///     <key> = <value>                 one line per parameter
///     <name> [<rows> <cols>] =        matrix header, followed by one line per row
///     <name> [<n>] =                  vector header, followed by one line of n values
///
/// Floats are written with 17 significant digits, so parse(serialize(r)) == r.
/// Blank lines and lines starting with '#' are ignored.
class ExperimentReport {
public:
    struct Array {
        std::string name;
        std::vector<Index> dims;    // {n} or {rows, cols}
        std::vector<double> values; // row-major
        bool operator==(const Array&) const = default;
    };

    ExperimentReport() = default;
    explicit ExperimentReport(std::string experiment) : experiment_(std::move(experiment)) { check_key(experiment_); }

    [[nodiscard]] const std::string& experiment() const noexcept { return experiment_; }

    void set(const std::string& key, std::string value) {
        check_key(key);
        if (value.find('\n') != std::string::npos) throw InvalidArgument("report value for '" + key + "' contains a newline");
        for (auto& [k, v] : params_) {
            if (k == key) {
                v = std::move(value);
                return;
            }
        }
        params_.emplace_back(key, std::move(value));
    }
    void set(const std::string& key, const char* value) { set(key, std::string(value)); }
    void set(const std::string& key, double value) { set(key, detail::format_double(value)); }
    void set(const std::string& key, long long value) { set(key, std::to_string(value)); }

    [[nodiscard]] bool has(const std::string& key) const {
        return std::any_of(params_.begin(), params_.end(), [&](const auto& p) { return p.first == key; });
    }
    [[nodiscard]] const std::string& param(const std::string& key) const {
        for (const auto& [k, v] : params_)
            if (k == key) return v;
        throw InvalidArgument("report has no parameter '" + key + "'");
    }
    [[nodiscard]] double param_double(const std::string& key) const { return detail::parse_double(param(key), key); }
    [[nodiscard]] long param_long(const std::string& key) const { return detail::parse_long(param(key), key); }
    [[nodiscard]] const std::vector<std::pair<std::string, std::string>>& params() const noexcept { return params_; }

    void set_array(const std::string& name, const Vector& v) {
        put({name, {v.size()}, std::vector<double>(v.data(), v.data() + v.size())});
    }
    void set_array(const std::string& name, const Matrix& m) {
        Array a{name, {m.rows(), m.cols()}, {}};
        a.values.reserve(static_cast<std::size_t>(m.size()));
        for (Index i = 0; i < m.rows(); ++i)
            for (Index j = 0; j < m.cols(); ++j) a.values.push_back(m(i, j));
        put(std::move(a));
    }
    void set_scalar(const std::string& name, double v) { put({name, {1}, {v}}); }

    [[nodiscard]] bool has_array(const std::string& name) const { return find(name) != nullptr; }
    [[nodiscard]] const Array& array(const std::string& name) const {
        const Array* a = find(name);
        if (!a) throw InvalidArgument("report has no array '" + name + "'");
        return *a;
    }
    [[nodiscard]] Vector vector(const std::string& name) const {
        const Array& a = array(name);
        return Eigen::Map<const Vector>(a.values.data(), static_cast<Index>(a.values.size()));
    }
    [[nodiscard]] Matrix matrix(const std::string& name) const {
        const Array& a = array(name);
        if (a.dims.size() != 2) throw InvalidArgument("report array '" + name + "' is not a matrix");
        Matrix m(a.dims[0], a.dims[1]);
        for (Index i = 0; i < m.rows(); ++i)
            for (Index j = 0; j < m.cols(); ++j) m(i, j) = a.values[static_cast<std::size_t>(i * m.cols() + j)];
        return m;
    }
    [[nodiscard]] double scalar(const std::string& name) const {
        const Array& a = array(name);
        if (a.values.size() != 1) throw InvalidArgument("report array '" + name + "' is not a scalar");
        return a.values.front();
    }
    [[nodiscard]] const std::vector<Array>& arrays() const noexcept { return arrays_; }

    bool operator==(const ExperimentReport&) const = default;

    [[nodiscard]] std::string serialize() const {
        std::string out;
        out += "format = ";
        out += kReportFormat;
        out += "\nexperiment = " + experiment_ + "\n";
        for (const auto& [k, v] : params_) out += k + " = " + v + "\n";
        for (const auto& a : arrays_) {
            out += a.name + " [";
            for (std::size_t i = 0; i < a.dims.size(); ++i) out += (i ? " " : "") + std::to_string(a.dims[i]);
            out += "] =\n";
            const std::size_t width = a.dims.size() == 2 ? static_cast<std::size_t>(a.dims[1]) : a.values.size();
            for (std::size_t i = 0; i < a.values.size(); ++i) {
                out += detail::format_double(a.values[i]);
                out += (width == 0 || (i + 1) % width == 0) ? "\n" : " ";
            }
            if (a.values.empty()) out += "\n";
        }
        return out;
    }

    static ExperimentReport parse(std::string_view text) {
        ExperimentReport r;
        std::vector<std::string_view> lines = detail::split(text, '\n');
        std::size_t i = 0;
        auto fail = [&](std::size_t line, const std::string& msg) -> InvalidArgument {
            return InvalidArgument("report line " + std::to_string(line + 1) + ": " + msg);
        };
        auto next_content = [&]() -> bool {
            while (i < lines.size()) {
                const auto t = trim(lines[i]);
                if (!t.empty() && t.front() != '#') return true;
                ++i;
            }
            return false;
        };
        bool have_format = false;
        bool have_experiment = false;
        while (next_content()) {
            const std::string_view line = trim(lines[i]);
            const auto eq = line.find('=');
            if (eq == std::string_view::npos) throw fail(i, "expected '='");
            const std::string_view lhs = trim(line.substr(0, eq));
            const std::string_view rhs = trim(line.substr(eq + 1));
            const auto bracket = lhs.find('[');
            if (bracket == std::string_view::npos) {
                const std::string key(lhs);
                if (key == "format") {
                    if (rhs != kReportFormat) throw fail(i, "unsupported format '" + std::string(rhs) + "'");
                    have_format = true;
                } else if (key == "experiment") {
                    r.experiment_ = std::string(rhs);
                    have_experiment = true;
                } else {
                    try {
                        r.set(key, std::string(rhs));
                    } catch (const InvalidArgument& e) {
                        throw fail(i, e.what());
                    }
                }
                ++i;
                continue;
            }
            if (!rhs.empty()) throw fail(i, "array values must start on the next line");
            const std::string name(trim(lhs.substr(0, bracket)));
            const auto close = lhs.find(']', bracket);
            if (close == std::string_view::npos) throw fail(i, "unterminated dimension list");
            Array a{name, {}, {}};
            std::istringstream dims{std::string(lhs.substr(bracket + 1, close - bracket - 1))};
            long long d = 0;
            while (dims >> d) {
                if (d < 0) throw fail(i, "negative dimension");
                a.dims.push_back(static_cast<Index>(d));
            }
            if (a.dims.empty() || a.dims.size() > 2) throw fail(i, "expected one or two dimensions");
            std::size_t count = 1;
            for (Index dim : a.dims) count *= static_cast<std::size_t>(dim);
            a.values.reserve(count);
            const std::size_t header = i++;
            while (a.values.size() < count) {
                if (i >= lines.size()) throw fail(header, "array '" + name + "' is truncated");
                for (const auto tok : detail::split(trim(lines[i]), ' ')) {
                    if (tok.empty()) continue;
                    char* end = nullptr;
                    const std::string s(tok);
                    const double v = std::strtod(s.c_str(), &end);
                    if (end != s.c_str() + s.size()) throw fail(i, "invalid number '" + s + "'");
                    a.values.push_back(v);
                }
                ++i;
            }
            if (a.values.size() != count) throw fail(i - 1, "array '" + name + "' has too many values");
            try {
                r.put(std::move(a));
            } catch (const InvalidArgument& e) {
                throw fail(header, e.what());
            }
        }
        if (!have_format) throw InvalidArgument("report: missing format line");
        if (!have_experiment) throw InvalidArgument("report: missing experiment line");
        return r;
    }

    void save(const std::string& path) const {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw InvalidArgument("cannot open '" + path + "' for writing");
        const std::string text = serialize();
        f.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!f) throw InvalidArgument("failed writing '" + path + "'");
    }

    static ExperimentReport load(const std::string& path) {
        std::ifstream f(path, std::ios::binary);
        if (!f) throw InvalidArgument("cannot open report '" + path + "'");
        std::ostringstream ss;
        ss << f.rdbuf();
        return parse(ss.str());
    }

private:
    static std::string_view trim(std::string_view s) {
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
        return s;
    }

    static void check_key(const std::string& key) {
        if (key.empty()) throw InvalidArgument("report key must not be empty");
        for (char c : key) {
            if (c == ' ' || c == '\t' || c == '=' || c == '[' || c == ']' || c == '#' || c == '\n' || c == '\r')
                throw InvalidArgument("report key '" + key + "' contains a reserved character");
        }
    }

    [[nodiscard]] const Array* find(const std::string& name) const {
        for (const auto& a : arrays_)
            if (a.name == name) return &a;
        return nullptr;
    }

    void put(Array a) {
        check_key(a.name);
        for (auto& existing : arrays_) {
            if (existing.name == a.name) {
                existing = std::move(a);
                return;
            }
        }
        arrays_.push_back(std::move(a));
    }

    std::string experiment_;
    std::vector<std::pair<std::string, std::string>> params_;
    std::vector<Array> arrays_;
};

}  // namespace rkhs
