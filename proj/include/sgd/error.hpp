#ifndef SGD_ERROR_HPP
#define SGD_ERROR_HPP

#include <stdexcept>
#include <string>

namespace sgd {

/// Broad error classes. The CLI maps them to exit codes: `config`, `spec`,
/// `plan` and `format` of a configuration file are validation failures; the
/// rest are data failures.
enum class error_kind {
    format,     // malformed input header or document
    data,       // unusable data (missing file, non-monotone timestamps, ...)
    span,       // no overlap between series spans
    spec,       // invalid synthesis specification
    statistic,  // statistic undefined on the input (e.g. no valid samples)
    domain,     // argument outside a model's validity range
    config,     // inconsistent network / scenario configuration
    plan,       // invalid cluster plan
};

inline const char* to_string(error_kind k) noexcept {
    switch (k) {
    case error_kind::format: return "format";
    case error_kind::data: return "data";
    case error_kind::span: return "span";
    case error_kind::spec: return "spec";
    case error_kind::statistic: return "statistic";
    case error_kind::domain: return "domain";
    case error_kind::config: return "config";
    case error_kind::plan: return "plan";
    }
    return "unknown";
}

class error : public std::runtime_error {
public:
    error(error_kind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    error_kind kind() const noexcept { return kind_; }

private:
    error_kind kind_;
};

#define SGD_DEFINE_ERROR(name, k)                                              \
    struct name : error {                                                      \
        explicit name(const std::string& what) : error(error_kind::k, what) {} \
    }

SGD_DEFINE_ERROR(format_error, format);
SGD_DEFINE_ERROR(data_error, data);
SGD_DEFINE_ERROR(span_error, span);
SGD_DEFINE_ERROR(spec_error, spec);
SGD_DEFINE_ERROR(statistic_error, statistic);
SGD_DEFINE_ERROR(domain_error, domain);
SGD_DEFINE_ERROR(config_error, config);
SGD_DEFINE_ERROR(plan_error, plan);

#undef SGD_DEFINE_ERROR

} // namespace sgd

#endif
