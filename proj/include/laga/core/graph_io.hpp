#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "laga/core/graph.hpp"
#include "laga/detail/sha256.hpp"

namespace laga {

namespace fs = std::filesystem;

inline std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw GraphError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw GraphError("cannot write " + path.string());
    out << content;
}

// One node per line: {"id":..,"text":..,"label":..|null,"split":..}, with
// "generated":true only for synthetic nodes. Emission order is by id.
inline std::string nodes_to_jsonl(const TextAttributedGraph& g) {
    std::string out;
    for (const auto& rec : g.nodes()) {
        nlohmann::ordered_json j;
        j["id"] = rec.id;
        j["text"] = rec.text;
        if (rec.label)
            j["label"] = *rec.label;
        else
            j["label"] = nullptr;
        j["split"] = to_string(rec.split);
        if (rec.generated) j["generated"] = true;
        out += j.dump();
        out += '\n';
    }
    return out;
}

inline std::string edges_to_csv(const TextAttributedGraph& g) {
    std::string out = "src,dst\n";
    for (const auto& [u, v] : g.edges()) {
        out += std::to_string(u);
        out += ',';
        out += std::to_string(v);
        out += '\n';
    }
    return out;
}

inline nlohmann::ordered_json manifest_json(const TextAttributedGraph& g,
                                            const std::string& nodes_sha,
                                            const std::string& edges_sha) {
    nlohmann::ordered_json j;
    j["name"] = g.metadata().name;
    j["num_classes"] = g.num_classes();
    j["n"] = g.n();
    j["m"] = g.m();
    j["sha256_nodes"] = nodes_sha;
    j["sha256_edges"] = edges_sha;
    return j;
}

inline void save_graph(const TextAttributedGraph& g, const fs::path& dir) {
    const std::string nodes = nodes_to_jsonl(g);
    const std::string edges = edges_to_csv(g);
    const auto manifest =
        manifest_json(g, detail::sha256_hex(nodes), detail::sha256_hex(edges));
    fs::create_directories(dir);
    write_file(dir / "nodes.jsonl", nodes);
    write_file(dir / "edges.csv", edges);
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

inline std::vector<NodeRecord> parse_nodes_jsonl(const std::string& content) {
    std::vector<NodeRecord> nodes;
    std::istringstream in(content);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw GraphError("nodes.jsonl line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!j.is_object() || !j.contains("id") || !j.contains("text") || !j.contains("split"))
            throw GraphError("nodes.jsonl line " + std::to_string(line_no) +
                             ": record must carry id, text and split");
        NodeRecord rec;
        rec.id = j.at("id").get<int>();
        rec.text = j.at("text").get<std::string>();
        if (j.contains("label") && !j.at("label").is_null()) rec.label = j.at("label").get<int>();
        rec.split = split_from_string(j.at("split").get<std::string>());
        if (j.contains("generated")) rec.generated = j.at("generated").get<bool>();
        nodes.push_back(std::move(rec));
    }
    return nodes;
}

inline std::vector<std::pair<int, int>> parse_edges_csv(const std::string& content) {
    std::vector<std::pair<int, int>> edges;
    std::istringstream in(content);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1) {
            if (line != "src,dst")
                throw GraphError("edges.csv: expected header 'src,dst', found '" + line + "'");
            continue;
        }
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw GraphError("edges.csv line " + std::to_string(line_no) + ": expected 'src,dst'");
        try {
            std::size_t used = 0;
            const int u = std::stoi(line.substr(0, comma), &used);
            if (used != comma) throw std::invalid_argument("trailing characters");
            const std::string rest = line.substr(comma + 1);
            const int v = std::stoi(rest, &used);
            if (used != rest.size()) throw std::invalid_argument("trailing characters");
            edges.emplace_back(u, v);
        } catch (const std::exception&) {
            throw GraphError("edges.csv line " + std::to_string(line_no) + ": malformed edge '" +
                             line + "'");
        }
    }
    return edges;
}

inline TextAttributedGraph load_graph(const fs::path& dir) {
    const std::string nodes_raw = read_file(dir / "nodes.jsonl");
    const std::string edges_raw = read_file(dir / "edges.csv");
    const std::string manifest_raw = read_file(dir / "manifest.json");
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(manifest_raw);
    } catch (const nlohmann::json::exception& e) {
        throw GraphError("manifest.json: " + std::string(e.what()));
    }
    GraphMetadata meta;
    meta.name = manifest.value("name", std::string("graph"));
    const int num_classes = manifest.at("num_classes").get<int>();

    auto g = TextAttributedGraph::create(parse_nodes_jsonl(nodes_raw), parse_edges_csv(edges_raw),
                                         num_classes, meta);
    if (manifest.contains("n") && manifest.at("n").get<int>() != g.n())
        throw GraphError("manifest.json: n " + manifest.at("n").dump() +
                         " does not match nodes.jsonl (" + std::to_string(g.n()) + ")");
    if (manifest.contains("m") && manifest.at("m").get<int>() != g.m())
        throw GraphError("manifest.json: m " + manifest.at("m").dump() +
                         " does not match edges.csv (" + std::to_string(g.m()) + ")");
    if (manifest.contains("sha256_nodes") &&
        manifest.at("sha256_nodes").get<std::string>() != detail::sha256_hex(nodes_raw))
        std::cerr << "warning: " << (dir / "nodes.jsonl").string()
                  << " does not match manifest checksum\n";
    if (manifest.contains("sha256_edges") &&
        manifest.at("sha256_edges").get<std::string>() != detail::sha256_hex(edges_raw))
        std::cerr << "warning: " << (dir / "edges.csv").string()
                  << " does not match manifest checksum\n";
    return g;
}

}  // namespace laga
