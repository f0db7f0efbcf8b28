#include "flowforge/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "flowforge/features/feature.hpp"
#include "flowforge/util.hpp"

namespace flowforge {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) {
    throw ConfigError(msg);
}

void require_keys(const json& obj, const std::string& where,
                  const std::set<std::string>& allowed) {
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.contains(key)) {
            std::string known;
            for (const auto& k : allowed) {
                known += known.empty() ? k : ", " + k;
            }
            fail(where + ": unknown key \"" + key + "\" (known keys: " + known + ")");
        }
    }
}

std::string string_field(const json& obj, const std::string& where, const std::string& key,
                         const std::string& fallback) {
    if (!obj.contains(key)) {
        return fallback;
    }
    if (!obj[key].is_string()) {
        fail(where + ": \"" + key + "\" must be a string");
    }
    return obj[key].get<std::string>();
}

uint64_t uint_field(const json& obj, const std::string& where, const std::string& key,
                    uint64_t fallback, uint64_t min_value) {
    if (!obj.contains(key)) {
        return fallback;
    }
    if (!obj[key].is_number_unsigned()) {
        fail(where + ": \"" + key + "\" must be a non-negative integer");
    }
    const uint64_t v = obj[key].get<uint64_t>();
    if (v < min_value) {
        fail(where + ": \"" + key + "\" must be >= " + std::to_string(min_value));
    }
    return v;
}

std::vector<std::string> string_list(const json& obj, const std::string& where,
                                     const std::string& key) {
    std::vector<std::string> out;
    if (!obj.contains(key)) {
        return out;
    }
    if (!obj[key].is_array()) {
        fail(where + ": \"" + key + "\" must be an array of strings");
    }
    for (const auto& item : obj[key]) {
        if (!item.is_string()) {
            fail(where + ": \"" + key + "\" must contain only strings");
        }
        out.push_back(item.get<std::string>());
    }
    return out;
}

ServiceClassSpec parse_service(const json& svc, size_t index) {
    const std::string where = "Services[" + std::to_string(index) + "]";
    if (!svc.is_object()) {
        fail(where + ": must be an object");
    }
    require_keys(svc, where, {"Name", "Filter", "Collect", "Emit"});

    ServiceClassSpec spec;
    spec.name = string_field(svc, where, "Name", "");
    if (spec.name.empty()) {
        fail(where + ": \"Name\" is required and must be non-empty");
    }
    const std::string who = "service \"" + spec.name + "\"";

    if (svc.contains("Filter")) {
        const json& filter = svc["Filter"];
        if (!filter.is_object()) {
            fail(who + ": \"Filter\" must be an object");
        }
        require_keys(filter, who + " Filter", {"DomainsString", "Prefixes"});
        spec.domains = string_list(filter, who, "DomainsString");
        for (const std::string& pattern : spec.domains) {
            try {
                spec.domain_regexes.emplace_back(pattern,
                                                 std::regex::ECMAScript | std::regex::icase);
            } catch (const std::regex_error& e) {
                fail(who + ": domain pattern \"" + pattern +
                     "\" is not a valid regex: " + e.what());
            }
        }
        for (const std::string& text : string_list(filter, who, "Prefixes")) {
            auto prefix = CidrPrefix::try_parse(text);
            if (!prefix) {
                fail(who + ": \"" + text + "\" is not a valid IPv4/IPv6 CIDR prefix");
            }
            spec.prefixes.push_back(*prefix);
            spec.prefix_texts.push_back(prefix->to_string());
        }
    }

    spec.collect = string_list(svc, who, "Collect");
    if (spec.collect.empty()) {
        fail(who + ": \"Collect\" must list at least one feature class");
    }
    std::set<std::string> collect_seen;
    for (const std::string& feature : spec.collect) {
        std::string error;
        if (!validate_feature_spec(feature, &error)) {
            fail(who + ": Collect entry invalid: " + error);
        }
        // Feature outputs are keyed by this string downstream; duplicates
        // would silently shadow each other.
        if (!collect_seen.insert(feature).second) {
            fail(who + ": Collect lists \"" + feature + "\" twice");
        }
    }

    spec.emit_interval_s = static_cast<uint32_t>(uint_field(svc, who, "Emit", 10, 1));
    return spec;
}

}  // namespace

RuntimeConfig RuntimeConfig::parse(const std::string& raw_text) {
    json root;
    try {
        root = json::parse(raw_text);
    } catch (const json::parse_error& e) {
        // e.what() carries the byte offset and context.
        fail(std::string("config syntax error: ") + e.what());
    }
    if (!root.is_object()) {
        fail("config root must be a JSON object");
    }
    require_keys(root, "config", {"System", "Services"});
    if (!root.contains("System") || !root["System"].is_object()) {
        fail("config: \"System\" object is required");
    }
    const json& sys = root["System"];
    require_keys(sys, "System",
                 {"PcapFile", "CaptureInterface", "LocalPrefixes", "Workers", "FlowIdleTimeout",
                  "OutputDirectory", "MaxFlows", "DnsTtlFloor", "DropUnclassified", "RotateMb",
                  "QueueDepth"});

    RuntimeConfig cfg;
    cfg.pcap_file = string_field(sys, "System", "PcapFile", "");
    cfg.capture_interface = string_field(sys, "System", "CaptureInterface", "");
    if (!cfg.pcap_file.empty() && !cfg.capture_interface.empty()) {
        fail("System: \"PcapFile\" and \"CaptureInterface\" are mutually exclusive");
    }

    const auto local_texts = string_list(sys, "System", "LocalPrefixes");
    if (local_texts.empty()) {
        fail("System: \"LocalPrefixes\" must list at least one CIDR prefix "
             "(traffic direction is undefined without it)");
    }
    for (const std::string& text : local_texts) {
        auto prefix = CidrPrefix::try_parse(text);
        if (!prefix) {
            fail("System: LocalPrefixes entry \"" + text + "\" is not a valid CIDR prefix");
        }
        cfg.local_prefixes.push_back(*prefix);
        cfg.local_prefix_texts.push_back(prefix->to_string());
    }

    cfg.worker_count = static_cast<uint32_t>(uint_field(sys, "System", "Workers", 1, 1));
    cfg.flow_idle_timeout_s =
        static_cast<uint32_t>(uint_field(sys, "System", "FlowIdleTimeout", 600, 1));
    cfg.output_directory = string_field(sys, "System", "OutputDirectory", "out");
    if (cfg.output_directory.empty()) {
        fail("System: \"OutputDirectory\" must be non-empty");
    }
    cfg.max_flows = uint_field(sys, "System", "MaxFlows", 2000000, 1);
    if (sys.contains("DnsTtlFloor")) {
        if (!sys["DnsTtlFloor"].is_number_integer()) {
            fail("System: \"DnsTtlFloor\" must be an integer (seconds, or -1 for never-expire)");
        }
        cfg.dns_ttl_floor_s = sys["DnsTtlFloor"].get<int64_t>();
        if (cfg.dns_ttl_floor_s < -1) {
            fail("System: \"DnsTtlFloor\" must be >= 0, or -1 for never-expire");
        }
    }
    if (sys.contains("DropUnclassified")) {
        if (!sys["DropUnclassified"].is_boolean()) {
            fail("System: \"DropUnclassified\" must be a boolean");
        }
        cfg.drop_unclassified = sys["DropUnclassified"].get<bool>();
    }
    cfg.rotate_mb = uint_field(sys, "System", "RotateMb", 64, 1);
    cfg.queue_depth = static_cast<uint32_t>(uint_field(sys, "System", "QueueDepth", 8192, 16));

    if (root.contains("Services")) {
        if (!root["Services"].is_array()) {
            fail("config: \"Services\" must be an array");
        }
        std::set<std::string> seen;
        size_t index = 0;
        for (const auto& svc : root["Services"]) {
            ServiceClassSpec spec = parse_service(svc, index++);
            if (!seen.insert(spec.name).second) {
                fail("duplicate service name \"" + spec.name + "\"");
            }
            cfg.services.push_back(std::move(spec));
        }
    }
    return cfg;
}

RuntimeConfig RuntimeConfig::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail("cannot open config file: " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

void RuntimeConfig::finalize_capture(const std::string& pcap_override,
                                     const std::string& iface_override) {
    if (!pcap_override.empty() && !iface_override.empty()) {
        fail("--pcap and --iface are mutually exclusive");
    }
    if (!pcap_override.empty()) {
        pcap_file = pcap_override;
        capture_interface.clear();
    } else if (!iface_override.empty()) {
        capture_interface = iface_override;
        pcap_file.clear();
    }
    if (pcap_file.empty() == capture_interface.empty()) {
        fail("exactly one capture source required: set System.PcapFile or "
             "System.CaptureInterface in the config, or pass --pcap/--iface");
    }
}

std::string RuntimeConfig::serialize() const {
    json sys = json::object();
    if (!pcap_file.empty()) {
        sys["PcapFile"] = pcap_file;
    } else if (!capture_interface.empty()) {
        sys["CaptureInterface"] = capture_interface;
    }
    sys["LocalPrefixes"] = local_prefix_texts;
    sys["Workers"] = worker_count;
    sys["FlowIdleTimeout"] = flow_idle_timeout_s;
    sys["OutputDirectory"] = output_directory;
    sys["MaxFlows"] = max_flows;
    sys["DnsTtlFloor"] = dns_ttl_floor_s;
    sys["DropUnclassified"] = drop_unclassified;
    sys["RotateMb"] = rotate_mb;
    sys["QueueDepth"] = queue_depth;

    json svcs = json::array();
    for (const ServiceClassSpec& s : services) {
        json svc = json::object();
        svc["Name"] = s.name;
        svc["Filter"] = {{"DomainsString", s.domains}, {"Prefixes", s.prefix_texts}};
        svc["Collect"] = s.collect;
        svc["Emit"] = s.emit_interval_s;
        svcs.push_back(std::move(svc));
    }
    // nlohmann objects iterate in key order, which pins the byte form.
    const json root = {{"System", sys}, {"Services", svcs}};
    return root.dump(2);
}

uint64_t RuntimeConfig::hash() const {
    return fnv1a_64(serialize());
}

std::string RuntimeConfig::hash_hex() const {
    char buf[17];
    snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash()));
    return buf;
}

const ServiceClassSpec* RuntimeConfig::find_service(const std::string& name) const {
    for (const ServiceClassSpec& s : services) {
        if (s.name == name) {
            return &s;
        }
    }
    return nullptr;
}

}  // namespace flowforge
