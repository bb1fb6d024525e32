#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "semopt/effects.hpp"
#include "semopt/model.hpp"
#include "semopt/montecarlo.hpp"
#include "semopt/qp.hpp"

namespace semopt {

using OrderedJson = nlohmann::ordered_json;

OrderedJson to_json(const Matrix& m);
OrderedJson to_json(const std::vector<double>& v);
OrderedJson to_json(const SemModel& model);
OrderedJson to_json(const TotalEffects& te);
OrderedJson to_json(const Moments& mo);
OrderedJson to_json(const BoxQp& qp);
OrderedJson to_json(const KktReport& kkt);
OrderedJson to_json(const QpSolution& sol);
OrderedJson to_json(const SampleMoments& sm);
OrderedJson to_json(const CompareReport& rep);

// Deterministic serialization: insertion-ordered keys, two-space indent,
// floating-point numbers at 17 significant digits (lossless round trip).
// Non-finite values become the strings "inf", "-inf" and "nan".
void write_json(const OrderedJson& doc, std::ostream& os);
std::string json_to_string(const OrderedJson& doc);

// Text-summary helpers (6 significant digits, aligned columns).
std::string format_number(double v);
void print_labeled_matrix(std::ostream& os, const std::string& title, const Matrix& m,
                          const std::vector<std::string>& row_names,
                          const std::vector<std::string>& col_names);
void print_labeled_vector(std::ostream& os, const std::string& title,
                          const std::vector<double>& v, const std::vector<std::string>& names);

}  // namespace semopt
