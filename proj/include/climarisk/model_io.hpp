#ifndef CLIMARISK_MODEL_IO_HPP
#define CLIMARISK_MODEL_IO_HPP

#include <fstream>
#include <string>
#include <utility>

#include <json.hpp>

#include "climarisk/elasticity.hpp"
#include "climarisk/error.hpp"
#include "climarisk/json_writer.hpp"
#include "climarisk/svm.hpp"

namespace climarisk {

inline constexpr int svm_model_format_version = 1;

/// Versioned model document: hyperplane, dual state, and the probability
/// sigmoid, for reuse outside the training run.
inline Json model_to_json(const SvmModel& model, const Calibration& calibration) {
    Json doc = Json::object();
    doc.set("format", "climarisk-svm");
    doc.set("format_version", svm_model_format_version);
    doc.set("w", Json(model.w));
    doc.set("b", model.b);
    doc.set("alphas", Json(model.alphas));
    doc.set("C", model.C);
    Json support = Json::array();
    for (auto i : model.support_indices) support.push(i);
    doc.set("support_indices", std::move(support));
    doc.set("converged", model.converged);
    doc.set("kkt_residual", model.kkt_residual);
    Json calib = Json::object();
    calib.set("A", calibration.A);
    calib.set("B", calibration.B);
    doc.set("calibration", std::move(calib));
    return doc;
}

inline std::pair<SvmModel, Calibration> model_from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || doc.value("format", "") != "climarisk-svm")
        throw Error(Errc::no_model, "not a climarisk-svm document");
    if (doc.value("format_version", 0) != svm_model_format_version)
        throw Error(Errc::no_model, "unsupported model format version");
    SvmModel model;
    model.w = doc.at("w").get<std::vector<double>>();
    model.b = doc.at("b").get<double>();
    model.alphas = doc.at("alphas").get<std::vector<double>>();
    model.C = doc.at("C").get<double>();
    model.support_indices = doc.at("support_indices").get<std::vector<std::size_t>>();
    model.converged = doc.value("converged", true);
    model.kkt_residual = doc.value("kkt_residual", 0.0);
    Calibration calibration;
    calibration.A = doc.at("calibration").at("A").get<double>();
    calibration.B = doc.at("calibration").at("B").get<double>();
    return {std::move(model), calibration};
}

inline std::pair<SvmModel, Calibration> load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io_error, "cannot open \"" + path + "\"");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::io_error, "malformed model JSON: " + std::string(e.what()));
    }
    return model_from_json(doc);
}

inline void write_curve_csv(std::ostream& out, const ProbabilityCurve& curve) {
    out << "lambda,probability\n";
    for (std::size_t i = 0; i < curve.lambdas.size(); ++i)
        out << format_double(curve.lambdas[i]) << ',' << format_double(curve.probabilities[i])
            << '\n';
}

inline void write_roc_csv(std::ostream& out, const RocCurve& curve) {
    out << "fpr,tpr,threshold\n";
    for (const auto& point : curve.points)
        out << format_double(point.fpr) << ',' << format_double(point.tpr) << ','
            << format_double(point.threshold) << '\n';
}

} // namespace climarisk

#endif // CLIMARISK_MODEL_IO_HPP
