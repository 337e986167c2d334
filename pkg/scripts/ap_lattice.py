"""Analytic A_p membership of |x|^alpha against the empirical divergence of the A_p constant at the origin."""


from fiolab import weights
from fiolab.grid import make_grid

ALPHAS = (-1.5, -0.5, 0.0, 0.75, 2.5)
PS = (1.0, 1.5, 2.0, 4.0)

if __name__ == "__main__":
    g = make_grid(1, 1024, 16)
    balls = weights.BallFamily.at_origin(1)
    print("alpha     p   member  diverges  values by radius")
    for alpha in ALPHAS:
        for p in PS:
            w = weights.power_weight(alpha)
            rep = weights.ap1_constant(w, balls, g) if p == 1 else weights.ap_constant(w, p, balls, g)
            vals = " ".join(f"{v:.3g}" for _, v in rep.trend())
            member = weights.power_weight_class(alpha, p, 1)
            flag = "" if member != rep.diverges() else "  <- mismatch"
            print(f"{alpha:5.2f} {p:5.2f}   {member!s:6}  {rep.diverges()!s:8}  {vals}{flag}")
    print(f"resolution radius {4 * g.spacing:.4g}; smaller balls are excluded from the trend")
