#ifndef CLIMARISK_JSON_WRITER_HPP
#define CLIMARISK_JSON_WRITER_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace climarisk {

/// Insertion-ordered JSON document builder. Exists because the run outputs
/// pin their number format (17 significant digits, non-finite as null) and
/// their key order; parsing stays with nlohmann::json.
class Json {
public:
    using Array = std::vector<Json>;
    using Object = std::vector<std::pair<std::string, Json>>;

    Json() : value_(nullptr) {}
    Json(std::nullptr_t) : value_(nullptr) {}
    Json(bool v) : value_(v) {}
    Json(double v) : value_(v) {}
    Json(int v) : value_(static_cast<std::int64_t>(v)) {}
    Json(std::int64_t v) : value_(v) {}
    Json(std::uint64_t v) : value_(v) {}
    Json(const char* v) : value_(std::string(v)) {}
    Json(std::string v) : value_(std::move(v)) {}
    Json(Array v) : value_(std::move(v)) {}
    Json(Object v) : value_(std::move(v)) {}

    template <typename T>
    Json(const std::vector<T>& values) : value_(Array{}) {
        auto& array = std::get<Array>(value_);
        array.reserve(values.size());
        for (const auto& v : values) array.emplace_back(v);
    }

    static Json object() { return Json(Object{}); }
    static Json array() { return Json(Array{}); }

    Json& set(std::string key, Json value) {
        std::get<Object>(value_).emplace_back(std::move(key), std::move(value));
        return *this;
    }

    Json& push(Json value) {
        std::get<Array>(value_).push_back(std::move(value));
        return *this;
    }

    bool is_object() const { return std::holds_alternative<Object>(value_); }

    std::string dump(int indent = 2) const {
        std::string out;
        write(out, indent, 0);
        out.push_back('\n');
        return out;
    }

private:
    static void write_escaped(std::string& out, const std::string& s) {
        out.push_back('"');
        for (unsigned char c : s) {
            switch (c) {
                case '"': out += "\\\""; break;
                case '\\': out += "\\\\"; break;
                case '\n': out += "\\n"; break;
                case '\r': out += "\\r"; break;
                case '\t': out += "\\t"; break;
                default:
                    if (c < 0x20) {
                        char buf[8];
                        std::snprintf(buf, sizeof buf, "\\u%04x", c);
                        out += buf;
                    } else {
                        out.push_back(static_cast<char>(c));
                    }
            }
        }
        out.push_back('"');
    }

    void write(std::string& out, int indent, int depth) const {
        const std::string pad(static_cast<std::size_t>(indent) * (depth + 1), ' ');
        const std::string close_pad(static_cast<std::size_t>(indent) * depth, ' ');
        if (std::holds_alternative<std::nullptr_t>(value_)) {
            out += "null";
        } else if (const bool* b = std::get_if<bool>(&value_)) {
            out += *b ? "true" : "false";
        } else if (const std::int64_t* i = std::get_if<std::int64_t>(&value_)) {
            out += std::to_string(*i);
        } else if (const std::uint64_t* u = std::get_if<std::uint64_t>(&value_)) {
            out += std::to_string(*u);
        } else if (const double* d = std::get_if<double>(&value_)) {
            if (!std::isfinite(*d)) {
                out += "null";
            } else {
                char buf[40];
                std::snprintf(buf, sizeof buf, "%.17g", *d);
                out += buf;
            }
        } else if (const std::string* s = std::get_if<std::string>(&value_)) {
            write_escaped(out, *s);
        } else if (const Array* a = std::get_if<Array>(&value_)) {
            if (a->empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            for (std::size_t i = 0; i < a->size(); ++i) {
                out += pad;
                (*a)[i].write(out, indent, depth + 1);
                if (i + 1 < a->size()) out.push_back(',');
                out.push_back('\n');
            }
            out += close_pad + "]";
        } else if (const Object* o = std::get_if<Object>(&value_)) {
            if (o->empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            for (std::size_t i = 0; i < o->size(); ++i) {
                out += pad;
                write_escaped(out, (*o)[i].first);
                out += ": ";
                (*o)[i].second.write(out, indent, depth + 1);
                if (i + 1 < o->size()) out.push_back(',');
                out.push_back('\n');
            }
            out += close_pad + "}";
        }
    }

    std::variant<std::nullptr_t, bool, std::int64_t, std::uint64_t, double, std::string, Array,
                 Object>
        value_;
};

} // namespace climarisk

#endif // CLIMARISK_JSON_WRITER_HPP
