#pragma once

#include <optional>
#include <string>
#include <vector>

#include "batchclear/market.hpp"
#include "batchclear/rational_extract.hpp"

namespace batchclear {

// Instance schema:
// {"assets":["A","B"],
//  "participants":[
//    {"type":"limit_sell","sell":"A","buy":"B","amount":100,"min_price":0.5},
//    {"type":"limit_buy","sell":"A","buy":"B","endowment":10,"target":40,"max_price":2},
//    {"type":"cfmm","id":"m1","assets":["A","B"],"reserves":[1,1],
//     "function":{"kind":"lmsr"},"fee":0}],
//  "options":{"tol":1e-8}}
//
// function kinds: constant_product | weighted_product {"wa","wb"} |
// constant_sum {"rate"} | lmsr | monomial {"exponents"} | hspec {"coeffs"}.
batch_instance parse_instance(const std::string& json_text);
batch_instance load_instance(const std::string& path);

// Solution round-trips losslessly (doubles serialized exactly).
std::string solution_to_json(const batch_instance& inst, const batch_solution& sol,
                             const rational_solution* exact = nullptr);
batch_solution parse_solution(const batch_instance& inst, const std::string& json_text);
batch_solution load_solution(const batch_instance& inst, const std::string& path);

std::string report_to_json(const std::vector<check_result>& report);
std::string render_report_table(const std::vector<check_result>& report);

std::vector<batch_instance> parse_sequence(const std::string& json_text);
std::vector<batch_instance> load_sequence(const std::string& path);

// rate, D(rate), d(rate) rows for one CFMM of the instance.
std::string density_csv(const batch_instance& inst, const std::string& cfmm_id, int points = 256);

}  // namespace batchclear
