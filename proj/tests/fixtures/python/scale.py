def scale(values, factor):
    total = sum(values) * factor
    values.append(total)  # keep it
    return [total, -factor]
