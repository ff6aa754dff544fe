import os
from dotenv import load_dotenv

load_dotenv()


class Settings:
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO").upper()

    # Newton : valeurs par défaut de StepConfig (surchargées par newton_tol / newton_max_iter)
    GNI_NEWTON_TOL: float = float(os.getenv("GNI_NEWTON_TOL", "1e-12"))
    GNI_NEWTON_MAX_ITER: int = int(os.getenv("GNI_NEWTON_MAX_ITER", "50"))

    # Raffinement du pas de la solution de référence (h_ref = h / GNI_REF_REFINE)
    GNI_REF_REFINE: int = int(os.getenv("GNI_REF_REFINE", "100"))

    # Répertoire utilisé quand output_path est relatif
    GNI_OUTPUT_DIR: str = os.getenv("GNI_OUTPUT_DIR", ".")

    # Nombre de threads pour le balayage en h de la sous-commande convergence
    GNI_WORKERS: int = int(os.getenv("GNI_WORKERS", "1"))

    # Réservé : les exécutions sont déterministes, la graine n'est pas utilisée
    GNI_SEED: str | None = os.getenv("GNI_SEED")


settings = Settings()
