#pragma once

#include <string>
#include <vector>

namespace cma {

enum class Severity { Error, Warning };

struct ValidationIssue {
    Severity severity = Severity::Error;
    std::string code;    // stable machine-readable id, e.g. "sibling-infeasible"
    std::string path;    // location inside the validated object, e.g. "root/1/0"
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;

    bool ok() const {
        for (const auto& i : issues)
            if (i.severity == Severity::Error) return false;
        return true;
    }
    int error_count() const {
        int n = 0;
        for (const auto& i : issues) n += i.severity == Severity::Error;
        return n;
    }
    int warning_count() const { return static_cast<int>(issues.size()) - error_count(); }

    void error(std::string code, std::string path, std::string message) {
        issues.push_back({Severity::Error, std::move(code), std::move(path), std::move(message)});
    }
    void warn(std::string code, std::string path, std::string message) {
        issues.push_back({Severity::Warning, std::move(code), std::move(path), std::move(message)});
    }
    void merge(const ValidationReport& other, const std::string& prefix) {
        for (ValidationIssue i : other.issues) {
            i.path = prefix + (i.path.empty() ? "" : "/" + i.path);
            issues.push_back(std::move(i));
        }
    }
};

} // namespace cma
