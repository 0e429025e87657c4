#ifndef AISEL_JSON_UTIL_HPP
#define AISEL_JSON_UTIL_HPP

#include <nlohmann/json.hpp>

#include <set>
#include <string>
#include <type_traits>

#include "aisel/error.hpp"

namespace aisel {

using Json = nlohmann::json;

/// Strict reader over one JSON object: every key must be consumed through
/// get(), otherwise finish() rejects the leftovers.
class StrictObject {
public:
    StrictObject(const Json& j, std::string path) : json_(j), path_(std::move(path)) {
        if (!json_.is_object()) {
            throw ConfigError(path_ + " must be an object");
        }
    }

    template <typename T>
    T get(const std::string& key, const T& fallback) {
        seen_.insert(key);
        auto it = json_.find(key);
        if (it == json_.end()) {
            return fallback;
        }
        if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
            if (it->is_number_float()) throw ConfigError(qualified(key) + ": expected an integer");
            if constexpr (std::is_unsigned_v<T>) {
                if (it->is_number_integer() && !it->is_number_unsigned() && it->template get<long long>() < 0) {
                    throw ConfigError(qualified(key) + ": must be non-negative");
                }
            }
        }
        try {
            return it->template get<T>();
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(qualified(key) + ": " + e.what());
        }
    }

    /// Nested object; null/absent yields an empty object.
    Json child(const std::string& key) {
        seen_.insert(key);
        auto it = json_.find(key);
        if (it == json_.end() || it->is_null()) {
            return Json::object();
        }
        return *it;
    }

    std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const {
        for (auto it = json_.begin(); it != json_.end(); ++it) {
            if (!seen_.count(it.key())) {
                throw ConfigError("unknown key '" + qualified(it.key()) + "'");
            }
        }
    }

private:
    Json json_;
    std::string path_;
    std::set<std::string> seen_;
};

} // namespace aisel

#endif
