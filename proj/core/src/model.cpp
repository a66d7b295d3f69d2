#include "archivist/model.hpp"

#include "archivist/errors.hpp"

#include <boost/regex.hpp>

#include <unordered_set>

namespace archivist {

bool is_valid_rule_name(std::string_view name) {
    if (name.empty()) {
        return false;
    }
    auto head = [](char c) { return c == '_' || (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z'); };
    auto tail = [&](char c) { return head(c) || (c >= '0' && c <= '9'); };
    if (!head(name.front())) {
        return false;
    }
    for (char c : name.substr(1)) {
        if (!tail(c)) {
            return false;
        }
    }
    return true;
}

RuleSet::RuleSet(std::vector<FileDescriptionRule> rules) : rules_(std::move(rules)) {
    std::unordered_set<std::string_view> seen;
    for (const auto& rule : rules_) {
        if (!is_valid_rule_name(rule.name)) {
            throw ConfigError("rule name \"" + rule.name +
                              "\" is not a valid identifier ([A-Za-z_][A-Za-z0-9_]*)");
        }
        if (!seen.insert(rule.name).second) {
            throw ConfigError("duplicate rule name \"" + rule.name + "\"");
        }
        if (rule.kind == RuleKind::Regex) {
            try {
                boost::regex compiled(rule.pattern);
            } catch (const boost::regex_error& e) {
                throw ConfigError("rule \"" + rule.name + "\": pattern does not compile: " +
                                  e.what());
            }
        }
    }
}

const FileDescriptionRule* RuleSet::find(std::string_view name) const {
    for (const auto& rule : rules_) {
        if (rule.name == name) {
            return &rule;
        }
    }
    return nullptr;
}

} // namespace archivist
