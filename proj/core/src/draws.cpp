#include <lppi/csv.hpp>
#include <lppi/draws.hpp>
#include <lppi/error.hpp>

#include <cmath>
#include <sstream>

namespace lppi {

AuxParams PosteriorDraws::aux(Index draw) const
{
    AuxParams a;
    const Index off = aux_offset();
    switch (model.family()) {
        case Family::gaussian: a.sigma = values(draw, off); break;
        case Family::ordinal:
            a.thresholds.resize(static_cast<std::size_t>(model.categories() - 1));
            for (std::size_t k = 0; k < a.thresholds.size(); ++k) {
                a.thresholds[k] = values(draw, off + static_cast<Index>(k));
            }
            break;
        case Family::weibull: a.shape = values(draw, off); break;
        default: break;
    }
    return a;
}

std::vector<std::string> PosteriorDraws::canonical_columns(const Dataset& data,
                                                           const ObservationModel& model)
{
    std::vector<std::string> cols;
    if (model.has_intercept()) cols.emplace_back("b_Intercept");
    for (const auto& name : data.names) cols.push_back("b_" + name);
    for (const auto& level : data.group_levels) cols.push_back("r_" + level);
    for (auto& aux : model.aux_names()) cols.push_back(std::move(aux));
    return cols;
}

void PosteriorDraws::validate() const
{
    if (s() < 1) throw ValidationError("draws: need at least one draw");
    if (static_cast<Index>(columns.size()) != p()) throw ValidationError("draws: column count mismatch");
    for (Index r = 0; r < s(); ++r) {
        if (!values.row(r).allFinite()) {
            throw ValidationError("draws: non-finite value at draw " + std::to_string(r + 1));
        }
        try {
            model.validate_aux(aux(r));
        } catch (const DomainError& e) {
            throw ValidationError("draws: invalid auxiliary at draw " + std::to_string(r + 1) + ": "
                                  + e.what());
        }
    }
}

PosteriorDraws parse_draws(const std::string& text, const Dataset& data, const ObservationModel& model)
{
    const csv::Table table = csv::parse(text);
    PosteriorDraws draws;
    draws.model = model;
    draws.columns = PosteriorDraws::canonical_columns(data, model);
    draws.n_coef = data.d();
    draws.n_group = data.n_groups();

    std::vector<std::size_t> source;
    for (const auto& name : draws.columns) {
        const long c = table.column(name);
        if (c < 0) throw ValidationError("draws: missing column '" + name + "'");
        source.push_back(static_cast<std::size_t>(c));
    }
    draws.values.resize(static_cast<Index>(table.rows.size()), static_cast<Index>(source.size()));
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        for (std::size_t k = 0; k < source.size(); ++k) {
            draws.values(static_cast<Index>(r), static_cast<Index>(k)) =
                csv::to_double(table.rows[r][source[k]], r + 1, table.header[source[k]]);
        }
    }
    draws.validate();
    return draws;
}

PosteriorDraws load_draws(const std::string& path, const Dataset& data, const ObservationModel& model)
{
    const std::string text = csv::read_file(path);
    try {
        return parse_draws(text, data, model);
    } catch (const LoadError& e) {
        throw LoadError(path + ": " + e.what());
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

std::string draws_to_csv(const PosteriorDraws& draws)
{
    std::ostringstream out;
    for (std::size_t k = 0; k < draws.columns.size(); ++k) {
        if (k) out << ',';
        out << draws.columns[k];
    }
    out << '\n';
    for (Index r = 0; r < draws.s(); ++r) {
        for (Index k = 0; k < draws.p(); ++k) {
            if (k) out << ',';
            out << csv::format_double(draws.values(r, k));
        }
        out << '\n';
    }
    return out.str();
}

void save_draws(const PosteriorDraws& draws, const std::string& path)
{
    csv::write_file_atomic(path, draws_to_csv(draws));
}

} // namespace lppi
