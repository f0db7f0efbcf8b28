#include <charconv>
#include <functional>
#include <stdexcept>

#include "flowforge/features/bytes_copy.hpp"
#include "flowforge/features/feature.hpp"
#include "flowforge/features/latency_counters.hpp"
#include "flowforge/features/packet_counters.hpp"
#include "flowforge/features/packet_times.hpp"
#include "flowforge/features/png_copy.hpp"
#include "flowforge/features/tcp_counters.hpp"
#include "flowforge/features/video_segments.hpp"

namespace flowforge {

namespace {

struct ParsedSpec {
    std::string base;
    std::vector<std::string> args;
};

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t");
    size_t e = s.find_last_not_of(" \t");
    if (b == std::string::npos) {
        return "";
    }
    return s.substr(b, e - b + 1);
}

// Splits "Name(a,b)" into base name and argument list. No nesting, no quoting;
// feature parameters are numbers and simple keywords.
bool split_spec(const std::string& spec, ParsedSpec& out, std::string* error) {
    const std::string t = trim(spec);
    const size_t open = t.find('(');
    if (open == std::string::npos) {
        if (t.find(')') != std::string::npos) {
            *error = "unbalanced parenthesis in \"" + spec + "\"";
            return false;
        }
        out.base = t;
        return true;
    }
    if (t.back() != ')') {
        *error = "expected closing parenthesis in \"" + spec + "\"";
        return false;
    }
    out.base = trim(t.substr(0, open));
    const std::string inner = t.substr(open + 1, t.size() - open - 2);
    size_t pos = 0;
    while (pos <= inner.size()) {
        const size_t comma = inner.find(',', pos);
        const std::string piece =
            comma == std::string::npos ? inner.substr(pos) : inner.substr(pos, comma - pos);
        out.args.push_back(trim(piece));
        if (comma == std::string::npos) {
            break;
        }
        pos = comma + 1;
    }
    if (out.args.size() == 1 && out.args[0].empty()) {
        out.args.clear();
    }
    return true;
}

bool parse_size_arg(const std::string& text, size_t* out) {
    if (text.empty()) {
        return false;
    }
    size_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || value == 0) {
        return false;
    }
    *out = value;
    return true;
}

using Factory = std::function<std::unique_ptr<FeatureState>(const std::vector<std::string>&,
                                                            std::string*)>;

struct Entry {
    std::string name;
    Factory make;
};

std::unique_ptr<FeatureState> arg_error(std::string* error, const std::string& msg) {
    *error = msg;
    return nullptr;
}

const std::vector<Entry>& registry() {
    static const std::vector<Entry> entries = {
        {"PacketCounters",
         [](const std::vector<std::string>& args, std::string* error)
             -> std::unique_ptr<FeatureState> {
             if (!args.empty()) {
                 return arg_error(error, "PacketCounters takes no parameters");
             }
             return std::make_unique<PacketCountersState>();
         }},
        {"PacketTimes",
         [](const std::vector<std::string>& args, std::string* error)
             -> std::unique_ptr<FeatureState> {
             size_t cap = PacketTimesState::kDefaultCap;
             bool raw = false;
             if (args.size() > 2) {
                 return arg_error(error, "PacketTimes takes at most (cap, raw)");
             }
             if (!args.empty() && !parse_size_arg(args[0], &cap)) {
                 return arg_error(error, "PacketTimes cap must be a positive integer, got \"" +
                                             args[0] + "\"");
             }
             if (args.size() == 2) {
                 if (args[1] != "raw") {
                     return arg_error(error, "PacketTimes second parameter must be \"raw\"");
                 }
                 raw = true;
             }
             return std::make_unique<PacketTimesState>(cap, raw);
         }},
        {"TCPCounters",
         [](const std::vector<std::string>& args, std::string* error)
             -> std::unique_ptr<FeatureState> {
             if (!args.empty()) {
                 return arg_error(error, "TCPCounters takes no parameters");
             }
             return std::make_unique<TCPCountersState>();
         }},
        {"LatencyCounters",
         [](const std::vector<std::string>& args, std::string* error)
             -> std::unique_ptr<FeatureState> {
             size_t cap = LatencyCountersState::kDefaultCap;
             if (args.size() > 1) {
                 return arg_error(error, "LatencyCounters takes at most (sample cap)");
             }
             if (!args.empty() && !parse_size_arg(args[0], &cap)) {
                 return arg_error(error, "LatencyCounters cap must be a positive integer, got \"" +
                                             args[0] + "\"");
             }
             return std::make_unique<LatencyCountersState>(cap);
         }},
        {"VideoSegments",
         [](const std::vector<std::string>& args, std::string* error)
             -> std::unique_ptr<FeatureState> {
             bool strict = false;
             if (args.size() > 1 || (args.size() == 1 && args[0] != "strict")) {
                 return arg_error(error, "VideoSegments takes no parameter or (strict)");
             }
             strict = args.size() == 1;
             return std::make_unique<VideoSegmentsState>(strict);
         }},
        {"BytesCopy",
         [](const std::vector<std::string>& args, std::string* error)
             -> std::unique_ptr<FeatureState> {
             if (args.empty() || args.size() > 2) {
                 return arg_error(error, "BytesCopy requires (size) or (size, layers)");
             }
             size_t size = 0;
             CopyLayers layers = CopyLayers::payload;
             if (!parse_size_arg(args[0], &size)) {
                 return arg_error(error, "BytesCopy size must be a positive integer, got \"" +
                                             args[0] + "\"");
             }
             if (args.size() == 2 && !parse_copy_layers(args[1], &layers)) {
                 return arg_error(error, "BytesCopy layers must be headers|payload|both, got \"" +
                                             args[1] + "\"");
             }
             return std::make_unique<BytesCopyState>(size, layers);
         }},
        {"PngCopy",
         [](const std::vector<std::string>& args, std::string* error)
             -> std::unique_ptr<FeatureState> {
             if (args.size() < 2 || args.size() > 3) {
                 return arg_error(error, "PngCopy requires (width, height) or "
                                         "(width, height, layers)");
             }
             size_t w = 0;
             size_t h = 0;
             CopyLayers layers = CopyLayers::payload;
             if (!parse_size_arg(args[0], &w) || !parse_size_arg(args[1], &h)) {
                 return arg_error(error, "PngCopy width/height must be positive integers");
             }
             if (w > 65535 || h > 65535) {
                 return arg_error(error, "PngCopy dimensions out of range");
             }
             if (args.size() == 3 && !parse_copy_layers(args[2], &layers)) {
                 return arg_error(error, "PngCopy layers must be headers|payload|both, got \"" +
                                             args[2] + "\"");
             }
             return std::make_unique<PngCopyState>(static_cast<uint32_t>(w),
                                                   static_cast<uint32_t>(h), layers);
         }},
    };
    return entries;
}

std::string known_names() {
    std::string s;
    for (const Entry& e : registry()) {
        if (!s.empty()) {
            s += ", ";
        }
        s += e.name;
    }
    return s;
}

std::unique_ptr<FeatureState> build(const std::string& spec, std::string* error) {
    ParsedSpec parsed;
    std::string msg;
    if (!split_spec(spec, parsed, &msg)) {
        *error = msg;
        return nullptr;
    }
    for (const Entry& e : registry()) {
        if (e.name == parsed.base) {
            return e.make(parsed.args, error);
        }
    }
    *error = "unknown feature class \"" + parsed.base + "\"; registered classes: " + known_names();
    return nullptr;
}

}  // namespace

std::unique_ptr<FeatureState> make_feature_state(const std::string& spec) {
    std::string error;
    auto state = build(spec, &error);
    if (!state) {
        throw std::invalid_argument(error);
    }
    return state;
}

bool validate_feature_spec(const std::string& spec, std::string* error) {
    std::string local;
    auto state = build(spec, &local);
    if (!state && error != nullptr) {
        *error = local;
    }
    return state != nullptr;
}

const std::vector<std::string>& registered_feature_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const Entry& e : registry()) {
            v.push_back(e.name);
        }
        return v;
    }();
    return names;
}

}  // namespace flowforge
