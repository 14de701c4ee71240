#include "batchclear/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "batchclear/errors.hpp"

namespace batchclear {

namespace {

using nlohmann::json;

json read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw parse_error(std::string("invalid JSON in ") + path + ": " + e.what());
    }
    return j;
}

trading_function parse_function(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "constant_product") return trading_function(constant_product{});
    if (kind == "weighted_product")
        return trading_function(weighted_product{j.at("wa").get<double>(), j.at("wb").get<double>()});
    if (kind == "constant_sum") return trading_function(constant_sum{j.at("rate").get<double>()});
    if (kind == "lmsr") return trading_function(lmsr_rule{});
    if (kind == "monomial")
        return trading_function(monomial{j.at("exponents").get<std::vector<double>>()});
    if (kind == "hspec") return trading_function(hspec{j.at("coeffs").get<std::vector<double>>()});
    throw parse_error("unknown trading function kind '" + kind + "'");
}

json function_to_json(const trading_function& fn) {
    json j;
    if (fn.is<constant_product>()) {
        j["kind"] = "constant_product";
    } else if (const auto* w = fn.get_if<weighted_product>()) {
        j["kind"] = "weighted_product";
        j["wa"] = w->wa;
        j["wb"] = w->wb;
    } else if (const auto* cs = fn.get_if<constant_sum>()) {
        j["kind"] = "constant_sum";
        j["rate"] = cs->rate;
    } else if (fn.is<lmsr_rule>()) {
        j["kind"] = "lmsr";
    } else if (const auto* m = fn.get_if<monomial>()) {
        j["kind"] = "monomial";
        j["exponents"] = m->exponents;
    } else if (const auto* h = fn.get_if<hspec>()) {
        j["kind"] = "hspec";
        j["coeffs"] = h->coeffs;
    } else {
        j["kind"] = "unserializable";
    }
    return j;
}

batch_instance instance_from_json(const json& j) {
    batch_instance inst;
    inst.assets = j.at("assets").get<std::vector<std::string>>();
    auto asset_of = [&](const json& node, const char* field) {
        const std::string sym = node.at(field).get<std::string>();
        const int idx = inst.asset_index(sym);
        if (idx < 0) throw parse_error("participant references unknown asset '" + sym + "'");
        return idx;
    };
    for (const auto& pj : j.at("participants")) {
        const std::string type = pj.at("type").get<std::string>();
        if (type == "limit_sell") {
            limit_sell_offer s;
            s.sell = asset_of(pj, "sell");
            s.buy = asset_of(pj, "buy");
            s.amount = pj.at("amount").get<double>();
            s.min_price = pj.at("min_price").get<double>();
            inst.participants.emplace_back(s);
        } else if (type == "limit_buy") {
            limit_buy_offer b;
            b.sell = asset_of(pj, "sell");
            b.buy = asset_of(pj, "buy");
            b.endowment = pj.at("endowment").get<double>();
            b.target = pj.at("target").get<double>();
            b.max_price = pj.at("max_price").get<double>();
            inst.participants.emplace_back(b);
        } else if (type == "cfmm") {
            cfmm_decl c;
            c.id = pj.value("id", "");
            for (const auto& sym : pj.at("assets")) {
                const int idx = inst.asset_index(sym.get<std::string>());
                if (idx < 0) throw parse_error("cfmm references unknown asset");
                c.assets.push_back(idx);
            }
            c.reserves = pj.at("reserves").get<std::vector<double>>();
            c.fn = parse_function(pj.at("function"));
            c.fee = pj.value("fee", 0.0);
            inst.participants.emplace_back(std::move(c));
        } else {
            throw parse_error("unknown participant type '" + type + "'");
        }
    }
    if (j.contains("options")) inst.options.tol = j["options"].value("tol", 1e-8);
    return inst;
}

}  // namespace

batch_instance parse_instance(const std::string& text) {
    try {
        return instance_from_json(json::parse(text));
    } catch (const json::exception& e) {
        throw parse_error(std::string("invalid instance JSON: ") + e.what());
    }
}

batch_instance load_instance(const std::string& path) {
    try {
        return instance_from_json(read_file(path));
    } catch (const json::exception& e) {
        throw parse_error(std::string("invalid instance JSON: ") + e.what());
    }
}

std::string solution_to_json(const batch_instance& inst, const batch_solution& sol,
                             const rational_solution* exact) {
    json j;
    json prices = json::object();
    for (int a = 0; a < inst.asset_count(); ++a)
        prices[inst.assets[static_cast<size_t>(a)]] = sol.prices[a];
    j["prices"] = prices;
    json trades = json::array();
    for (size_t i = 0; i < sol.trades.size(); ++i) {
        json deltas = json::object();
        for (int a = 0; a < inst.asset_count(); ++a)
            deltas[inst.assets[static_cast<size_t>(a)]] = sol.trades[i][static_cast<size_t>(a)];
        trades.push_back({{"participant", i}, {"deltas", deltas}});
    }
    j["trades"] = trades;
    j["objective"] = sol.objective_value;
    j["iterations"] = sol.iterations;
    j["status"] = sol.status == solve_status::converged        ? "converged"
                  : sol.status == solve_status::not_converged ? "not_converged"
                                                               : "no_equilibrium_found";
    if (!sol.verifier_report.empty()) {
        json rep = json::array();
        for (const auto& c : sol.verifier_report)
            rep.push_back({{"name", c.name}, {"pass", c.pass}, {"residual", c.residual},
                           {"detail", c.detail}});
        j["verifier"] = rep;
    }
    if (exact && exact->status == rational_status::ok) {
        json ex;
        json eprices = json::object();
        for (int a = 0; a < inst.asset_count(); ++a)
            eprices[inst.assets[static_cast<size_t>(a)]] = {
                {"num", exact->prices[static_cast<size_t>(a)].num},
                {"den", exact->prices[static_cast<size_t>(a)].den}};
        ex["prices"] = eprices;
        json etrades = json::array();
        for (const auto& row : exact->trades) {
            json deltas = json::object();
            for (int a = 0; a < inst.asset_count(); ++a)
                deltas[inst.assets[static_cast<size_t>(a)]] = {
                    {"num", row[static_cast<size_t>(a)].num},
                    {"den", row[static_cast<size_t>(a)].den}};
            etrades.push_back(deltas);
        }
        ex["trades"] = etrades;
        j["exact"] = ex;
    }
    return j.dump(2);
}

batch_solution parse_solution(const batch_instance& inst, const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw parse_error(std::string("invalid solution JSON: ") + e.what());
    }
    batch_solution sol;
    sol.prices.values.resize(static_cast<size_t>(inst.asset_count()));
    for (int a = 0; a < inst.asset_count(); ++a)
        sol.prices[a] = j.at("prices").at(inst.assets[static_cast<size_t>(a)]).get<double>();
    sol.trades.assign(inst.participants.size(),
                      std::vector<double>(static_cast<size_t>(inst.asset_count()), 0.0));
    for (const auto& t : j.at("trades")) {
        const size_t i = t.at("participant").get<size_t>();
        if (i >= sol.trades.size()) throw parse_error("trade references unknown participant");
        for (int a = 0; a < inst.asset_count(); ++a)
            sol.trades[i][static_cast<size_t>(a)] =
                t.at("deltas").at(inst.assets[static_cast<size_t>(a)]).get<double>();
    }
    sol.objective_value = j.value("objective", 0.0);
    sol.iterations = j.value("iterations", 0L);
    const std::string st = j.value("status", "converged");
    sol.status = st == "converged"        ? solve_status::converged
                 : st == "not_converged" ? solve_status::not_converged
                                          : solve_status::no_equilibrium_found;
    return sol;
}

batch_solution load_solution(const batch_instance& inst, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_solution(inst, ss.str());
}

std::string report_to_json(const std::vector<check_result>& report) {
    json rep = json::array();
    for (const auto& c : report)
        rep.push_back(
            {{"name", c.name}, {"pass", c.pass}, {"residual", c.residual}, {"detail", c.detail}});
    return rep.dump(2);
}

std::string render_report_table(const std::vector<check_result>& report) {
    std::ostringstream os;
    os << std::left << std::setw(22) << "check" << std::setw(8) << "result"
       << std::setw(14) << "residual" << "detail\n";
    for (const auto& c : report) {
        os << std::left << std::setw(22) << c.name << std::setw(8) << (c.pass ? "pass" : "FAIL")
           << std::setw(14) << std::scientific << std::setprecision(3) << c.residual << c.detail
           << "\n";
    }
    return os.str();
}

std::vector<batch_instance> parse_sequence(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw parse_error(std::string("invalid sequence JSON: ") + e.what());
    }
    std::vector<batch_instance> batches;
    for (const auto& b : j) batches.push_back(instance_from_json(b));
    return batches;
}

std::vector<batch_instance> load_sequence(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_sequence(ss.str());
}

std::string density_csv(const batch_instance& inst, const std::string& cfmm_id, int points) {
    const cfmm_decl* target = nullptr;
    for (const auto& part : inst.participants) {
        if (const auto* c = std::get_if<cfmm_decl>(&part))
            if (c->id == cfmm_id) target = c;
    }
    if (!target) throw parse_error("no cfmm with id '" + cfmm_id + "'");
    trading_function fn = target->fee > 0.0
                              ? apply_fee_wrapper(target->fn, target->reserves, target->fee)
                              : target->fn;
    auto [d0, d1] = density_from_function(fn, target->reserves);
    std::ostringstream os;
    os << "rate,D,d\n";
    os << std::setprecision(17);
    for (const auto& half : {d0, d1}) {
        for (const auto& row : half.sample_curve(points))
            os << row[0] << "," << row[1] << "," << row[2] << "\n";
    }
    return os.str();
}

}  // namespace batchclear
