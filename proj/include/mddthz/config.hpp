#pragma once

#include <istream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "mddthz/scenario.hpp"

namespace mddthz {

/// Flat `key = value` settings with `#` comments. Tracks which keys were read
/// so callers can reject typos.
class KeyValues {
public:
    static KeyValues parse(std::istream& in, const std::string& origin = "<stream>");
    static KeyValues load(const std::string& path);

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    bool has(const std::string& key) const { return values_.count(key) != 0; }

    // Each getter leaves `out` untouched when the key is absent.
    void get(const std::string& key, double& out);
    void get(const std::string& key, int& out);
    void get(const std::string& key, std::uint64_t& out);
    void get(const std::string& key, bool& out);
    void get(const std::string& key, std::string& out);

    std::vector<std::string> unused() const;
    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    const std::string* lookup(const std::string& key);

    std::map<std::string, std::string> values_;
    std::set<std::string> used_;
    std::string origin_;
};

/// Reads every scenario key that is present; see configs/desk.cfg for the list.
void apply_scenario_keys(KeyValues& kv, ScenarioConfig& cfg);

/// Inverse of apply_scenario_keys, used for manifests.
std::map<std::string, std::string> scenario_keys(const ScenarioConfig& cfg);

}  // namespace mddthz
