#pragma once

// ParamTape: named views over parameter tensors and their gradient
// accumulators. The tensors live in whatever owns them (e.g. ModelParams);
// the tape is how the optimizer and the gradient checker enumerate them.

#include <string>
#include <vector>

#include "sine/matrix.hpp"

namespace sine {

struct ParamTape {
    struct Entry {
        std::string name;
        Matrix* value = nullptr;
        Matrix* grad = nullptr;
        bool frozen = false;
    };

    std::vector<Entry> entries;

    void add(const std::string& name, Matrix& value, Matrix& grad, bool frozen = false) {
        if (!value.same_shape(grad))
            throw ContractError("ParamTape: gradient shape does not mirror " + name);
        entries.push_back({name, &value, &grad, frozen});
    }

    void zero_grad() {
        for (auto& e : entries) e.grad->zero();
    }

    std::size_t coordinate_count() const {
        std::size_t n = 0;
        for (const auto& e : entries) n += e.value->size();
        return n;
    }

    const Entry& find(const std::string& name) const {
        for (const auto& e : entries)
            if (e.name == name) return e;
        throw ContractError("ParamTape: no parameter named " + name);
    }
};

}  // namespace sine
