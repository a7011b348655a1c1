#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "tsplines/bures.hpp"
#include "tsplines/coupling.hpp"
#include "tsplines/errors.hpp"

namespace tsplines {

/// Malformed or invalid measure file.
struct SchemaError : Error {
    using Error::Error;
};

/// Shortest decimal representation that round-trips to the same double.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

/// Writes content to path via a temporary file and an atomic rename, so a
/// failure never leaves a partial output behind.
inline void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot open output file: " + tmp.string());
        }
        out << content;
        if (!out) {
            throw Error("failed writing output file: " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

/// One record of a measure file: an observation of one family at a time
/// (or at a 2D site, for thin-plate inputs).
struct MeasureRecord {
    enum class Family { Gaussian, Measure1D, Cloud };

    Family family = Family::Gaussian;
    double time = 0.0;
    bool has_site = false;
    Eigen::Vector2d site = Eigen::Vector2d::Zero();

    std::variant<GaussianMeasure, Measure1D, PointCloud> payload{
        GaussianMeasure::scalar(0.0, 1.0)};
};

struct MeasureFile {
    MeasureRecord::Family family = MeasureRecord::Family::Gaussian;
    std::vector<MeasureRecord> records;
};

namespace io_detail {

inline MeasureRecord::Family parse_family(const std::string& name) {
    if (name == "gaussian") return MeasureRecord::Family::Gaussian;
    if (name == "measure1d") return MeasureRecord::Family::Measure1D;
    if (name == "cloud") return MeasureRecord::Family::Cloud;
    throw SchemaError("unknown family: " + name);
}

inline GaussianMeasure parse_gaussian(const nlohmann::json& j) {
    if (!j.contains("mean") || !j.contains("cov")) {
        throw SchemaError("gaussian record needs 'mean' and 'cov'");
    }
    const auto mean_list = j.at("mean").get<std::vector<double>>();
    const auto cov_list = j.at("cov").get<std::vector<double>>();
    const auto d = static_cast<Eigen::Index>(mean_list.size());
    if (cov_list.size() != mean_list.size() * mean_list.size()) {
        throw SchemaError("'cov' must be a d*d row-major array");
    }
    Eigen::VectorXd mean(d);
    for (Eigen::Index i = 0; i < d; ++i) mean(i) = mean_list[i];
    Eigen::MatrixXd cov(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index k = 0; k < d; ++k) cov(i, k) = cov_list[i * d + k];
    }
    try {
        return GaussianMeasure(std::move(mean), std::move(cov));
    } catch (const Error& e) {
        throw SchemaError(std::string("invalid gaussian record: ") + e.what());
    }
}

inline Measure1D parse_measure1d(const nlohmann::json& j) {
    try {
        if (j.contains("tag")) {
            const auto tag = j.at("tag").get<std::string>();
            if (tag == "gaussian") {
                return Measure1D::gaussian(j.at("m").get<double>(), j.at("sigma").get<double>());
            }
            if (tag == "uniform") {
                return Measure1D::uniform(j.at("a").get<double>(), j.at("b").get<double>());
            }
            throw SchemaError("unknown measure1d tag: " + tag);
        }
        if (!j.contains("quantiles")) {
            throw SchemaError("measure1d record needs 'quantiles' or a closed-form 'tag'");
        }
        const auto& q = j.at("quantiles");
        return Measure1D::from_quantiles(q.at("levels").get<std::vector<double>>(),
                                         q.at("values").get<std::vector<double>>());
    } catch (const SchemaError&) {
        throw;
    } catch (const Error& e) {
        throw SchemaError(std::string("invalid measure1d record: ") + e.what());
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("invalid measure1d record: ") + e.what());
    }
}

inline PointCloud parse_cloud(const nlohmann::json& j) {
    if (!j.contains("points")) {
        throw SchemaError("cloud record needs 'points'");
    }
    const auto points = j.at("points").get<std::vector<std::vector<double>>>();
    if (points.empty()) {
        throw SchemaError("cloud record needs at least one point");
    }
    const auto d = static_cast<Eigen::Index>(points.front().size());
    Eigen::MatrixXd pts(static_cast<Eigen::Index>(points.size()), d);
    for (std::size_t k = 0; k < points.size(); ++k) {
        if (static_cast<Eigen::Index>(points[k].size()) != d) {
            throw SchemaError("cloud points must share one dimension");
        }
        for (Eigen::Index c = 0; c < d; ++c) pts(static_cast<Eigen::Index>(k), c) = points[k][c];
    }
    try {
        return PointCloud(std::move(pts));
    } catch (const Error& e) {
        throw SchemaError(std::string("invalid cloud record: ") + e.what());
    }
}

} // namespace io_detail

/// Parses a measure file: either an array of records or an object with a
/// "measures" array. Every record carries "family" plus "time" or "site".
inline MeasureFile parse_measure_file(const nlohmann::json& doc) {
    const nlohmann::json* records = nullptr;
    if (doc.is_array()) {
        records = &doc;
    } else if (doc.is_object() && doc.contains("measures")) {
        records = &doc.at("measures");
    } else {
        throw SchemaError("expected an array of records or an object with 'measures'");
    }
    if (!records->is_array() || records->empty()) {
        throw SchemaError("measure list must be a non-empty array");
    }

    MeasureFile file;
    bool first = true;
    for (const auto& j : *records) {
        if (!j.is_object() || !j.contains("family")) {
            throw SchemaError("each record must be an object with a 'family' field");
        }
        MeasureRecord rec;
        rec.family = io_detail::parse_family(j.at("family").get<std::string>());
        if (first) {
            file.family = rec.family;
            first = false;
        } else if (rec.family != file.family) {
            throw MixedFamilies("all records in a measure file must share one family");
        }

        if (j.contains("site")) {
            const auto site = j.at("site").get<std::vector<double>>();
            if (site.size() != 2) {
                throw SchemaError("'site' must be a pair [x, y]");
            }
            rec.has_site = true;
            rec.site << site[0], site[1];
        } else if (j.contains("time")) {
            rec.time = j.at("time").get<double>();
        } else {
            throw SchemaError("each record needs 'time' or 'site'");
        }

        switch (rec.family) {
            case MeasureRecord::Family::Gaussian:
                rec.payload = io_detail::parse_gaussian(j);
                break;
            case MeasureRecord::Family::Measure1D:
                rec.payload = io_detail::parse_measure1d(j);
                break;
            case MeasureRecord::Family::Cloud:
                rec.payload = io_detail::parse_cloud(j);
                break;
        }
        file.records.push_back(std::move(rec));
    }
    return file;
}

inline MeasureFile load_measure_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw SchemaError("cannot open input file: " + path.string());
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("invalid JSON: ") + e.what());
    }
    return parse_measure_file(doc);
}

} // namespace tsplines
