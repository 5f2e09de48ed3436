from .tables import read_csv, write_csv
from .vtkio import read_vtk, write_vtk_structured, write_vtk_unstructured
from .config import load_config, scenario_from_config
