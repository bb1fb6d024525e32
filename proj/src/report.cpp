#include "semopt/report.hpp"

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace semopt {

namespace {

void write_escaped(const std::string& s, std::ostream& os) {
    os << '"';
    for (char c : s) {
        switch (c) {
            case '"': os << "\\\""; break;
            case '\\': os << "\\\\"; break;
            case '\n': os << "\\n"; break;
            case '\r': os << "\\r"; break;
            case '\t': os << "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    os << buf;
                } else {
                    os << c;
                }
        }
    }
    os << '"';
}

void write_double(double v, std::ostream& os) {
    if (std::isnan(v)) {
        os << "\"nan\"";
        return;
    }
    if (std::isinf(v)) {
        os << (v > 0 ? "\"inf\"" : "\"-inf\"");
        return;
    }
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << buf;
}

void write_value(const OrderedJson& v, std::ostream& os, int depth) {
    const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
    const std::string pad_in(static_cast<std::size_t>(depth + 1) * 2, ' ');
    switch (v.type()) {
        case OrderedJson::value_t::object: {
            if (v.empty()) {
                os << "{}";
                return;
            }
            os << "{\n";
            bool first = true;
            for (const auto& item : v.items()) {
                if (!first) os << ",\n";
                first = false;
                os << pad_in;
                write_escaped(item.key(), os);
                os << ": ";
                write_value(item.value(), os, depth + 1);
            }
            os << "\n" << pad << "}";
            return;
        }
        case OrderedJson::value_t::array: {
            if (v.empty()) {
                os << "[]";
                return;
            }
            // Flat arrays of scalars stay on one line; nested ones indent.
            bool scalar_only = true;
            for (const auto& item : v) {
                if (item.is_structured()) {
                    scalar_only = false;
                    break;
                }
            }
            if (scalar_only) {
                os << "[";
                bool first = true;
                for (const auto& item : v) {
                    if (!first) os << ", ";
                    first = false;
                    write_value(item, os, depth);
                }
                os << "]";
            } else {
                os << "[\n";
                bool first = true;
                for (const auto& item : v) {
                    if (!first) os << ",\n";
                    first = false;
                    os << pad_in;
                    write_value(item, os, depth + 1);
                }
                os << "\n" << pad << "]";
            }
            return;
        }
        case OrderedJson::value_t::string: write_escaped(v.get<std::string>(), os); return;
        case OrderedJson::value_t::boolean: os << (v.get<bool>() ? "true" : "false"); return;
        case OrderedJson::value_t::number_integer: os << v.get<long long>(); return;
        case OrderedJson::value_t::number_unsigned: os << v.get<unsigned long long>(); return;
        case OrderedJson::value_t::number_float: write_double(v.get<double>(), os); return;
        default: os << "null"; return;
    }
}

}  // namespace

OrderedJson to_json(const Matrix& m) {
    OrderedJson rows = OrderedJson::array();
    for (int i = 0; i < m.rows(); ++i) {
        OrderedJson row = OrderedJson::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

OrderedJson to_json(const std::vector<double>& v) {
    OrderedJson out = OrderedJson::array();
    for (double x : v) out.push_back(x);
    return out;
}

OrderedJson to_json(const SemModel& model) {
    OrderedJson j;
    j["covariates"] = model.names_z;
    j["treatments"] = model.names_x;
    j["outputs"] = model.names_y;
    j["a_zz"] = to_json(model.a_zz);
    j["a_xz"] = to_json(model.a_xz);
    j["a_xx"] = to_json(model.a_xx);
    j["a_yz"] = to_json(model.a_yz);
    j["a_yx"] = to_json(model.a_yx);
    j["a_yy"] = to_json(model.a_yy);
    j["mu_z"] = to_json(model.mu_z);
    j["mu_x"] = to_json(model.mu_x);
    j["mu_y"] = to_json(model.mu_y);
    j["s_zz"] = to_json(model.s_zz);
    j["s_xx"] = to_json(model.s_xx);
    j["s_yy"] = to_json(model.s_yy);
    return j;
}

OrderedJson to_json(const TotalEffects& te) {
    OrderedJson j;
    j["t_zz"] = to_json(te.t_zz);
    j["t_xz"] = to_json(te.t_xz);
    j["t_xx"] = to_json(te.t_xx);
    j["t_yz_through"] = to_json(te.t_yz_through);
    j["t_yz_avoid"] = to_json(te.t_yz_avoid);
    j["t_yz"] = to_json(te.t_yz);
    j["t_yx"] = to_json(te.t_yx);
    j["t_yy"] = to_json(te.t_yy);
    return j;
}

OrderedJson to_json(const Moments& mo) {
    OrderedJson j;
    j["mean_z"] = to_json(mo.mean_z);
    j["mean_x"] = to_json(mo.mean_x);
    j["mean_y"] = to_json(mo.mean_y);
    j["var_z"] = to_json(mo.var_z);
    j["var_x"] = to_json(mo.var_x);
    j["var_y"] = to_json(mo.var_y);
    j["cov_xz"] = to_json(mo.cov_xz);
    return j;
}

OrderedJson to_json(const BoxQp& qp) {
    OrderedJson j;
    j["h"] = to_json(qp.h);
    j["g"] = to_json(qp.g);
    j["c"] = qp.c;
    j["lower"] = to_json(qp.lower);
    j["upper"] = to_json(qp.upper);
    j["labels"] = qp.labels;
    return j;
}

OrderedJson to_json(const KktReport& kkt) {
    OrderedJson j;
    j["stationarity_residual"] = kkt.stationarity_residual;
    j["primal_violation"] = kkt.primal_violation;
    j["dual_violation"] = kkt.dual_violation;
    j["complementarity"] = kkt.complementarity;
    j["satisfied"] = kkt.satisfied;
    return j;
}

OrderedJson to_json(const QpSolution& sol) {
    OrderedJson j;
    j["alpha"] = to_json(sol.alpha);
    j["objective"] = sol.objective;
    j["lambda_lower"] = to_json(sol.lambda_lower);
    j["lambda_upper"] = to_json(sol.lambda_upper);
    j["iterations"] = sol.iterations;
    j["kkt"] = to_json(sol.kkt);
    return j;
}

namespace {

OrderedJson block_to_json(const BlockSampleMoments& b) {
    OrderedJson j;
    j["mean"] = to_json(b.mean);
    j["mean_se"] = to_json(b.mean_se);
    j["cov"] = to_json(b.cov);
    j["cov_se"] = to_json(b.cov_se);
    return j;
}

}  // namespace

OrderedJson to_json(const SampleMoments& sm) {
    OrderedJson j;
    j["n_samples"] = sm.n_samples;
    j["z"] = block_to_json(sm.z);
    j["x"] = block_to_json(sm.x);
    j["y"] = block_to_json(sm.y);
    j["cov_xz"] = to_json(sm.cov_xz);
    j["cov_xz_se"] = to_json(sm.cov_xz_se);
    return j;
}

OrderedJson to_json(const CompareReport& rep) {
    OrderedJson j;
    j["z_threshold"] = rep.z_threshold;
    j["max_z"] = rep.max_z;
    j["pass"] = rep.pass;
    OrderedJson entries = OrderedJson::array();
    for (const CompareEntry& e : rep.entries) {
        OrderedJson entry;
        entry["quantity"] = e.quantity;
        entry["analytic"] = e.analytic;
        entry["estimate"] = e.estimate;
        entry["se"] = e.se;
        entry["z"] = e.z;
        entry["pass"] = e.pass;
        entries.push_back(std::move(entry));
    }
    j["entries"] = std::move(entries);
    return j;
}

void write_json(const OrderedJson& doc, std::ostream& os) {
    write_value(doc, os, 0);
    os << "\n";
}

std::string json_to_string(const OrderedJson& doc) {
    std::ostringstream os;
    write_json(doc, os);
    return os.str();
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

void print_labeled_matrix(std::ostream& os, const std::string& title, const Matrix& m,
                          const std::vector<std::string>& row_names,
                          const std::vector<std::string>& col_names) {
    os << title << ":";
    if (m.empty()) {
        os << " (empty)\n";
        return;
    }
    os << "\n";

    std::size_t name_width = 0;
    for (const auto& n : row_names) name_width = std::max(name_width, n.size());
    std::vector<std::size_t> widths(m.cols());
    for (int j = 0; j < m.cols(); ++j) {
        widths[j] = j < static_cast<int>(col_names.size()) ? col_names[j].size() : 0;
        for (int i = 0; i < m.rows(); ++i) {
            widths[j] = std::max(widths[j], format_number(m(i, j)).size());
        }
    }

    if (!col_names.empty()) {
        os << "  " << std::string(name_width, ' ');
        for (int j = 0; j < m.cols(); ++j) {
            os << "  " << std::setw(static_cast<int>(widths[j])) << col_names[j];
        }
        os << "\n";
    }
    for (int i = 0; i < m.rows(); ++i) {
        os << "  " << std::setw(static_cast<int>(name_width))
           << (i < static_cast<int>(row_names.size()) ? row_names[i] : "");
        for (int j = 0; j < m.cols(); ++j) {
            os << "  " << std::setw(static_cast<int>(widths[j])) << format_number(m(i, j));
        }
        os << "\n";
    }
}

void print_labeled_vector(std::ostream& os, const std::string& title,
                          const std::vector<double>& v, const std::vector<std::string>& names) {
    os << title << ":";
    if (v.empty()) {
        os << " (empty)\n";
        return;
    }
    os << "\n";
    std::size_t name_width = 0;
    for (const auto& n : names) name_width = std::max(name_width, n.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        os << "  " << std::setw(static_cast<int>(name_width))
           << (i < names.size() ? names[i] : "") << "  " << format_number(v[i]) << "\n";
    }
}

}  // namespace semopt
