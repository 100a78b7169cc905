import csv

import numpy as np
import pytest

from qloan.data import Dataset

HEADER = [
    "Loan_ID", "Gender", "Married", "Dependents", "Education", "Self_Employed",
    "ApplicantIncome", "CoapplicantIncome", "LoanAmount", "Loan_Amount_Term",
    "Credit_History", "Property_Area", "Loan_Status",
]


def write_loan_csv(path, n=120, seed=0, labeled=True, id_prefix="LP", missing_rate=0.03, income_shift=0.0):
    """Write a loan-schema CSV whose label depends mostly on credit history."""
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(n):
        credit = int(rng.random() < 0.85)
        income = float(np.round(rng.lognormal(8.3, 0.6))) + income_shift
        coincome = float(np.round(rng.lognormal(7.0, 1.0))) if rng.random() < 0.55 else 0.0
        amount = float(np.round(np.clip(rng.normal(140, 60), 9, 700)))
        term = float(rng.choice([360, 360, 360, 180, 480, 300, 120]))
        area = rng.choice(["Rural", "Semiurban", "Urban"])
        p_yes = 0.85 if credit else 0.08
        if area == "Semiurban":
            p_yes = min(1.0, p_yes + 0.05)
        status = "Y" if rng.random() < p_yes else "N"
        row = {
            "Loan_ID": f"{id_prefix}{i:06d}",
            "Gender": rng.choice(["Male", "Female"], p=[0.8, 0.2]),
            "Married": rng.choice(["Yes", "No"], p=[0.65, 0.35]),
            "Dependents": rng.choice(["0", "1", "2", "3+"], p=[0.57, 0.17, 0.17, 0.09]),
            "Education": rng.choice(["Graduate", "Not Graduate"], p=[0.78, 0.22]),
            "Self_Employed": rng.choice(["No", "Yes"], p=[0.86, 0.14]),
            "ApplicantIncome": repr(income),
            "CoapplicantIncome": repr(coincome),
            "LoanAmount": repr(amount),
            "Loan_Amount_Term": repr(term),
            "Credit_History": repr(float(credit)),
            "Property_Area": area,
            "Loan_Status": status if labeled else "",
        }
        for col in ("Gender", "Married", "Dependents", "Self_Employed", "LoanAmount",
                    "Loan_Amount_Term", "Credit_History"):
            if rng.random() < missing_rate:
                row[col] = ""
        rows.append(row)
    header = HEADER if labeled else HEADER[:-1]
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=header, extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return path


@pytest.fixture
def loan_csv(tmp_path):
    def make(name="train.csv", **kwargs):
        return write_loan_csv(tmp_path / name, **kwargs)

    return make


def separable_dataset(seed=0, n=40):
    """Two-feature set: class 1 clustered near (0.9, 0.9), class 0 near (0.1, 0.1)."""
    rng = np.random.default_rng(seed)
    y = np.repeat([0, 1], n // 2)
    centers = np.where(y[:, None] == 1, 0.9, 0.1)
    return Dataset(centers + rng.uniform(-0.15, 0.15, size=(n, 2)), y)


def random_dataset(rng, n_samples, n_features):
    return Dataset(rng.normal(size=(n_samples, n_features)), rng.integers(0, 2, n_samples))
