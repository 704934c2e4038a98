#pragma once

// Scenario files (JSON). Schema:
//
// {
//   "name": "demo",                                  optional
//   "grid": {"cols": 21, "rows": 21, "spacing": 20},
//   "depot": [10, 10],
//   "uncertainty": 0.3,                              optional, default 0
//   "drone_defaults": {<drone fields>},              optional
//   "server_defaults": {<server fields>},            optional
//   "servers": [{"id": 1, "at": [5, 10], <server fields>}, ...],
//   "missions": {
//     "small": {"rect": [x0, y0, x1, y1]},           inclusive grid rectangle
//     "odd":   {"points": [[x, y], ...]}
//   },
//   "fleet": [{"mission": "small", "count": 10, <drone fields>}, ...]
// }
//
// Drone fields: cruise_speed, h_accel, h_decel, takeoff_time, land_time,
// sense_time, local_proc_time, data_in, data_out, energy_capacity, beta,
// gamma, depot_service_time. Server fields: proc_time, bandwidth,
// comm_range, msg_latency. Times in seconds, data in bytes, bandwidth in
// bits per second, distances in meters, grid coordinates in cells.

#include "scenario.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>
#include <string>

namespace droneoff
{
    struct ParseError : std::runtime_error
    {
        using std::runtime_error::runtime_error;
    };

    namespace io_detail
    {
        using nlohmann::json;

        [[noreturn]] inline void fail(const std::string &where, const std::string &what)
        {
            throw ParseError(where + ": " + what);
        }

        inline const json &member(const json &obj, const char *key, const std::string &where)
        {
            if (!obj.is_object() || !obj.contains(key))
                fail(where, std::string("missing field '") + key + "'");
            return obj.at(key);
        }

        inline double number(const json &v, const std::string &where)
        {
            if (!v.is_number())
                fail(where, "expected a number");
            return v.get<double>();
        }

        inline int integer(const json &v, const std::string &where)
        {
            if (!v.is_number_integer())
                fail(where, "expected an integer");
            return v.get<int>();
        }

        inline GridPoint point(const json &v, const std::string &where)
        {
            if (!v.is_array() || v.size() != 2)
                fail(where, "expected [x, y]");
            return {integer(v[0], where + "[0]"), integer(v[1], where + "[1]")};
        }

        inline void drone_fields(const json &obj, DroneSpec &d, const std::string &where)
        {
            const std::pair<const char *, double DroneSpec::*> fields[] = {
                {"cruise_speed", &DroneSpec::cruise_speed},
                {"h_accel", &DroneSpec::h_accel},
                {"h_decel", &DroneSpec::h_decel},
                {"takeoff_time", &DroneSpec::takeoff_time},
                {"land_time", &DroneSpec::land_time},
                {"sense_time", &DroneSpec::sense_time},
                {"local_proc_time", &DroneSpec::local_proc_time},
                {"data_in", &DroneSpec::data_in},
                {"data_out", &DroneSpec::data_out},
                {"energy_capacity", &DroneSpec::energy_capacity},
                {"beta", &DroneSpec::beta},
                {"gamma", &DroneSpec::gamma},
                {"depot_service_time", &DroneSpec::depot_service_time},
            };
            for (auto [key, field] : fields)
                if (obj.contains(key))
                    d.*field = number(obj.at(key), where + "." + key);
        }

        inline void server_fields(const json &obj, ServerSpec &s, const std::string &where)
        {
            const std::pair<const char *, double ServerSpec::*> fields[] = {
                {"proc_time", &ServerSpec::proc_time},
                {"bandwidth", &ServerSpec::bandwidth},
                {"comm_range", &ServerSpec::comm_range},
                {"msg_latency", &ServerSpec::msg_latency},
            };
            for (auto [key, field] : fields)
                if (obj.contains(key))
                    s.*field = number(obj.at(key), where + "." + key);
        }

        inline std::string line_of(const std::string &text, std::size_t byte)
        {
            std::size_t line = 1;
            for (std::size_t i = 0; i < byte && i < text.size(); ++i)
                line += text[i] == '\n';
            return "line " + std::to_string(line);
        }
    }

    /// Parses scenario JSON text; `source` prefixes error messages.
    inline Scenario parse_scenario_text(const std::string &text, const std::string &source = "scenario")
    {
        using namespace io_detail;
        json doc;
        try
        {
            doc = json::parse(text);
        }
        catch (const json::parse_error &e)
        {
            fail(source + " " + line_of(text, e.byte), "malformed JSON");
        }
        if (!doc.is_object())
            fail(source, "top level must be an object");

        Scenario sc;
        sc.name = doc.value("name", std::string("custom"));
        const json &grid = member(doc, "grid", source);
        sc.cols = integer(member(grid, "cols", source + ".grid"), source + ".grid.cols");
        sc.rows = integer(member(grid, "rows", source + ".grid"), source + ".grid.rows");
        sc.spacing = number(member(grid, "spacing", source + ".grid"), source + ".grid.spacing");
        sc.depot = point(member(doc, "depot", source), source + ".depot");
        if (doc.contains("uncertainty"))
            sc.uncertainty = number(doc.at("uncertainty"), source + ".uncertainty");

        DroneSpec drone_base;
        if (doc.contains("drone_defaults"))
            drone_fields(doc.at("drone_defaults"), drone_base, source + ".drone_defaults");
        ServerSpec server_base;
        if (doc.contains("server_defaults"))
            server_fields(doc.at("server_defaults"), server_base, source + ".server_defaults");

        const json &servers = member(doc, "servers", source);
        if (!servers.is_array())
            fail(source + ".servers", "expected an array");
        for (std::size_t i = 0; i < servers.size(); ++i)
        {
            const std::string where = source + ".servers[" + std::to_string(i) + "]";
            ServerSpec s = server_base;
            s.id = integer(member(servers[i], "id", where), where + ".id");
            s.location = point(member(servers[i], "at", where), where + ".at");
            server_fields(servers[i], s, where);
            sc.servers.push_back(s);
        }

        const json &missions = member(doc, "missions", source);
        if (!missions.is_object())
            fail(source + ".missions", "expected an object");
        std::map<std::string, std::vector<GridPoint>> named;
        for (const auto &[key, m] : missions.items())
        {
            const std::string where = source + ".missions." + key;
            std::vector<GridPoint> pois;
            if (m.contains("rect"))
            {
                const json &r = m.at("rect");
                if (!r.is_array() || r.size() != 4)
                    fail(where + ".rect", "expected [x0, y0, x1, y1]");
                pois = rectangle(integer(r[0], where + ".rect[0]"), integer(r[1], where + ".rect[1]"),
                                 integer(r[2], where + ".rect[2]"), integer(r[3], where + ".rect[3]"));
            }
            else if (m.contains("points"))
            {
                const json &pts = m.at("points");
                if (!pts.is_array())
                    fail(where + ".points", "expected an array");
                for (std::size_t j = 0; j < pts.size(); ++j)
                    pois.push_back(point(pts[j], where + ".points[" + std::to_string(j) + "]"));
            }
            else
                fail(where, "needs 'rect' or 'points'");
            named[key] = std::move(pois);
        }

        const json &fleet = member(doc, "fleet", source);
        if (!fleet.is_array())
            fail(source + ".fleet", "expected an array");
        for (std::size_t i = 0; i < fleet.size(); ++i)
        {
            const std::string where = source + ".fleet[" + std::to_string(i) + "]";
            const json &g = fleet[i];
            if (!member(g, "mission", where).is_string())
                fail(where + ".mission", "expected a string");
            const std::string mission = g.at("mission").get<std::string>();
            auto it = named.find(mission);
            if (it == named.end())
                fail(where + ".mission", "unknown mission '" + mission + "'");
            const int count = g.contains("count") ? integer(g.at("count"), where + ".count") : 1;
            if (count <= 0)
                fail(where + ".count", "must be positive");
            DroneSpec d = drone_base;
            drone_fields(g, d, where);
            for (int c = 0; c < count; ++c)
            {
                d.id = static_cast<int>(sc.drones.size()) + 1;
                sc.drones.push_back(d);
                sc.missions.push_back(it->second);
                sc.mission_names.push_back(mission);
            }
        }

        try
        {
            sc.validate();
        }
        catch (const std::exception &e)
        {
            fail(source, e.what());
        }
        return sc;
    }

    /// Loads a built-in scenario by name, or parses the file at `path`.
    inline Scenario parse_scenario(const std::string &path)
    {
        Scenario sc;
        if (builtin::lookup(path, sc))
            return sc;
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw ParseError(path + ": cannot open scenario file");
        std::ostringstream text;
        text << in.rdbuf();
        return parse_scenario_text(text.str(), path);
    }

    /// Canonical JSON rendering of a scenario (round-trips through the parser).
    inline std::string scenario_to_json(const Scenario &sc)
    {
        using nlohmann::ordered_json;
        ordered_json doc;
        doc["name"] = sc.name;
        doc["grid"] = {{"cols", sc.cols}, {"rows", sc.rows}, {"spacing", sc.spacing}};
        doc["depot"] = {sc.depot.x, sc.depot.y};
        doc["uncertainty"] = sc.uncertainty;
        doc["servers"] = ordered_json::array();
        for (const auto &s : sc.servers)
            doc["servers"].push_back({{"id", s.id},
                                      {"at", {s.location.x, s.location.y}},
                                      {"proc_time", s.proc_time},
                                      {"bandwidth", s.bandwidth},
                                      {"comm_range", s.comm_range},
                                      {"msg_latency", s.msg_latency}});
        doc["missions"] = ordered_json::object();
        doc["fleet"] = ordered_json::array();
        for (std::size_t m = 0; m < sc.drone_count(); ++m)
        {
            const std::string key = "m" + std::to_string(m + 1);
            ordered_json pts = ordered_json::array();
            for (const auto &p : sc.missions[m])
                pts.push_back({p.x, p.y});
            doc["missions"][key] = {{"points", pts}};
            const DroneSpec &d = sc.drones[m];
            doc["fleet"].push_back({{"mission", key},
                                    {"count", 1},
                                    {"cruise_speed", d.cruise_speed},
                                    {"h_accel", d.h_accel},
                                    {"h_decel", d.h_decel},
                                    {"takeoff_time", d.takeoff_time},
                                    {"land_time", d.land_time},
                                    {"sense_time", d.sense_time},
                                    {"local_proc_time", d.local_proc_time},
                                    {"data_in", d.data_in},
                                    {"data_out", d.data_out},
                                    {"energy_capacity", d.energy_capacity},
                                    {"beta", d.beta},
                                    {"gamma", d.gamma},
                                    {"depot_service_time", d.depot_service_time}});
        }
        return doc.dump(2);
    }
}
