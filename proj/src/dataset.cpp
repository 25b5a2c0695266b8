#include "nilc/dataset.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

namespace nilc {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<Utterance> parse_dataset(std::istream& in, const std::string& origin) {
    std::vector<Utterance> out;
    std::unordered_set<long long> seen_ids;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        nlohmann::json rec = nlohmann::json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.is_object())
            throw std::runtime_error(origin + ": parse error at line " + std::to_string(line_no));
        if (!rec.contains("text") || !rec["text"].is_string())
            throw std::runtime_error(origin + ": missing \"text\" field at line " +
                                     std::to_string(line_no));
        Utterance u;
        u.id = static_cast<int>(out.size());
        u.text = rec["text"].get<std::string>();
        if (trim(u.text).empty())
            throw std::runtime_error(origin + ": empty text at line " + std::to_string(line_no));
        if (rec.contains("label") && !rec["label"].is_null()) {
            if (!rec["label"].is_string())
                throw std::runtime_error(origin + ": label must be a string at line " +
                                         std::to_string(line_no));
            u.label = rec["label"].get<std::string>();
        }
        if (rec.contains("id") && !rec["id"].is_null()) {
            if (!rec["id"].is_number_integer())
                throw std::runtime_error(origin + ": id must be an integer at line " +
                                         std::to_string(line_no));
            long long ex = rec["id"].get<long long>();
            if (!seen_ids.insert(ex).second)
                throw std::runtime_error(origin + ": duplicate id " + std::to_string(ex) +
                                         " at line " + std::to_string(line_no));
            if (ex != u.id)
                throw std::runtime_error(origin + ": id " + std::to_string(ex) + " at line " +
                                         std::to_string(line_no) + " does not match position " +
                                         std::to_string(u.id));
        }
        out.push_back(std::move(u));
    }
    if (out.empty()) throw std::runtime_error(origin + ": empty dataset");
    return out;
}

std::vector<Utterance> load_dataset(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open dataset file: " + path);
    return parse_dataset(f, path);
}

std::string serialize_dataset(const std::vector<Utterance>& data) {
    std::ostringstream os;
    for (const auto& u : data) {
        nlohmann::json rec;
        rec["text"] = u.text;
        if (u.label) rec["label"] = *u.label;
        os << rec.dump() << "\n";
    }
    return os.str();
}

}  // namespace nilc
