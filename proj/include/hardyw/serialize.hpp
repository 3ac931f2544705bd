#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hardyw/geometry.hpp"

namespace hardyw {

// All numbers are written with up to 17 significant digits via to_chars
// (locale-independent, round-trips exactly to the same double). Paper-table
// comparisons need full precision, so shorter representations are not used.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v,
                                   std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

// Minimal ordered JSON emitter. Key order is exactly the call order, and
// doubles go through format_double, which keeps payloads byte-stable for a
// fixed (command, options, seed) triple.
class JsonWriter {
public:
    std::string str() && { return std::move(out_); }
    const std::string& str() const& { return out_; }

    JsonWriter& begin_object() { open('{'); return *this; }
    JsonWriter& end_object() { close('}'); return *this; }
    JsonWriter& begin_array() { open('['); return *this; }
    JsonWriter& end_array() { close(']'); return *this; }

    JsonWriter& key(std::string_view k) {
        comma();
        quote(k);
        out_ += ':';
        pending_value_ = true;
        return *this;
    }

    JsonWriter& value(double v) { comma(); out_ += format_double(v); return *this; }
    JsonWriter& value(int v) { return value(static_cast<std::int64_t>(v)); }
    JsonWriter& value(std::uint64_t v) { comma(); out_ += std::to_string(v); return *this; }
    JsonWriter& value(std::int64_t v) { comma(); out_ += std::to_string(v); return *this; }
    JsonWriter& value(bool v) { comma(); out_ += v ? "true" : "false"; return *this; }
    JsonWriter& value(std::string_view v) { comma(); quote(v); return *this; }
    JsonWriter& value(const char* v) { return value(std::string_view(v)); }

    template <class T>
    JsonWriter& kv(std::string_view k, const T& v) { return key(k).value(v); }

private:
    void open(char c) {
        comma();
        out_ += c;
        needs_comma_ = false;
    }
    void close(char c) {
        out_ += c;
        needs_comma_ = true;
    }
    void comma() {
        if (pending_value_) {
            pending_value_ = false;
            return;
        }
        if (needs_comma_) out_ += ',';
        needs_comma_ = true;
    }
    void quote(std::string_view s) {
        out_ += '"';
        for (char c : s) {
            switch (c) {
                case '"': out_ += "\\\""; break;
                case '\\': out_ += "\\\\"; break;
                case '\n': out_ += "\\n"; break;
                case '\t': out_ += "\\t"; break;
                default:
                    if (static_cast<unsigned char>(c) < 0x20) {
                        char esc[8];
                        std::snprintf(esc, sizeof esc, "\\u%04x", c);
                        out_ += esc;
                    } else {
                        out_ += c;
                    }
            }
        }
        out_ += '"';
    }

    std::string out_;
    bool needs_comma_ = false;
    bool pending_value_ = false;
};

// CSV: header row, comma separator, '.' decimal point, LF line endings.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i) out_ += ',';
            out_ += header[i];
        }
        out_ += '\n';
        columns_ = header.size();
    }

    template <class... Ts>
    void row(const Ts&... fields) {
        std::size_t i = 0;
        ((append(fields, i++)), ...);
        out_ += '\n';
    }

    const std::string& str() const { return out_; }

private:
    void append(double v, std::size_t i) { sep(i); out_ += format_double(v); }
    void append(int v, std::size_t i) { sep(i); out_ += std::to_string(v); }
    void append(const std::string& v, std::size_t i) { sep(i); out_ += v; }
    void sep(std::size_t i) {
        if (i) out_ += ',';
    }

    std::string out_;
    std::size_t columns_ = 0;
};

inline constexpr int hardy_config_schema_version = 1;

inline void write_setting_array(JsonWriter& w, const std::vector<MeasurementSetting>& s) {
    w.begin_array();
    for (const auto& m : s) {
        w.begin_object();
        w.kv("phi", m.phi);
        w.kv("theta", m.theta);
        w.end_object();
    }
    w.end_array();
}

// {"schema_version":1,"n":...,"amplitudes":[...],"U":[{"phi","theta"}...],"D":[...]}
inline void write_hardy_config(JsonWriter& w, const HardyConfig& c) {
    w.begin_object();
    w.kv("schema_version", hardy_config_schema_version);
    w.kv("n", c.n);
    w.key("amplitudes").begin_array();
    for (double a : c.amplitudes.values()) w.value(a);
    w.end_array();
    w.key("U");
    write_setting_array(w, c.U);
    w.key("D");
    write_setting_array(w, c.D);
    w.end_object();
}

inline std::string hardy_config_to_json(const HardyConfig& c) {
    JsonWriter w;
    write_hardy_config(w, c);
    return std::move(w).str();
}

inline HardyConfig hardy_config_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    const int n = j.at("n").get<int>();
    auto raw = j.at("amplitudes").get<std::vector<double>>();
    // empty array = scenario without W amplitudes (generic-state config)
    Amplitudes a = raw.empty() ? Amplitudes() : Amplitudes(std::move(raw));
    if (!a.empty() && a.size() != n)
        throw validation_error("hardy config: amplitude count does not match n");
    auto read_bank = [&](const char* name) {
        std::vector<MeasurementSetting> bank;
        for (const auto& e : j.at(name)) {
            bank.push_back({e.at("phi").get<double>(), e.at("theta").get<double>()});
        }
        if (static_cast<int>(bank.size()) != n)
            throw validation_error(std::string("hardy config: wrong ") + name + " count");
        return bank;
    };
    return HardyConfig{n, std::move(a), read_bank("U"), read_bank("D")};
}

} // namespace hardyw
