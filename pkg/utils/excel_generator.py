from openpyxl import Workbook
from openpyxl.cell import MergedCell
from openpyxl.styles import Font, Alignment, PatternFill, Border, Side
from openpyxl.chart import BarChart, Reference
from datetime import datetime


class ExcelReportGenerator:
    '''Base class for generating Excel reports'''

    def __init__(self, title):
        self.title = title
        self.workbook = Workbook()
        self.workbook.remove(self.workbook.active)

        self.header_font = Font(name='Arial', size=12, bold=True, color='FFFFFF')
        self.header_fill = PatternFill(start_color='2C5F2D', end_color='2C5F2D', fill_type='solid')
        self.title_font = Font(name='Arial', size=16, bold=True, color='2C5F2D')
        self.border = Border(
            left=Side(style='thin'),
            right=Side(style='thin'),
            top=Side(style='thin'),
            bottom=Side(style='thin'),
        )

    def create_sheet(self, name):
        return self.workbook.create_sheet(title=name)

    def add_title(self, sheet, title, row=1):
        sheet.merge_cells(f'A{row}:G{row}')
        cell = sheet[f'A{row}']
        cell.value = title
        cell.font = self.title_font
        cell.alignment = Alignment(horizontal='center', vertical='center')
        sheet.row_dimensions[row].height = 28

    def add_date(self, sheet, row=2):
        sheet.merge_cells(f'A{row}:G{row}')
        cell = sheet[f'A{row}']
        cell.value = f"Generated: {datetime.now().strftime('%d %B, %Y at %I:%M %p')}"
        cell.alignment = Alignment(horizontal='center')
        cell.font = Font(size=10, italic=True)

    def write_table(self, sheet, headers, rows, start_row):
        '''Header plus body rows; returns the last row written'''
        for col, header in enumerate(headers, 1):
            cell = sheet.cell(row=start_row, column=col, value=header)
            cell.font = self.header_font
            cell.fill = self.header_fill
            cell.alignment = Alignment(horizontal='center', vertical='center')
            cell.border = self.border
        row = start_row
        for values in rows:
            row += 1
            for col, value in enumerate(values, 1):
                cell = sheet.cell(row=row, column=col, value=value)
                cell.border = self.border
        return row

    def add_summary_section(self, sheet, summary_data, start_row):
        sheet.merge_cells(f'A{start_row}:B{start_row}')
        cell = sheet[f'A{start_row}']
        cell.value = 'Summary'
        cell.font = Font(size=12, bold=True)

        row = start_row + 1
        for label, value in summary_data.items():
            sheet[f'A{row}'] = label
            sheet[f'B{row}'] = value
            sheet[f'A{row}'].font = Font(bold=True)
            sheet[f'A{row}'].border = self.border
            sheet[f'B{row}'].border = self.border
            sheet[f'B{row}'].alignment = Alignment(horizontal='right')
            row += 1
        return row + 1

    def auto_adjust_columns(self, sheet):
        for column in sheet.columns:
            cells = [cell for cell in column if not isinstance(cell, MergedCell)]
            if not cells:
                continue
            width = max((len(str(cell.value)) for cell in cells if cell.value is not None), default=0)
            sheet.column_dimensions[cells[0].column_letter].width = min(width + 2, 40)

    def save(self, buffer):
        self.workbook.save(buffer)
        return buffer


class SliceStatsExcel(ExcelReportGenerator):
    '''Workbook with a summary, the per-plane table and the per map-plane table'''

    def __init__(self, title, summary, planes, pairs=()):
        super().__init__(title)
        self.summary = summary
        self.planes = list(planes)
        self.pairs = list(pairs)

    def build(self):
        sheet = self.create_sheet('Planes')
        self.add_title(sheet, self.title)
        self.add_date(sheet, row=2)
        start = self.add_summary_section(sheet, self.summary, start_row=4)

        headers = ['Plane', 'z', 'Active maps', 'Activations', 'Cuboid tests', 'Time (s)']
        rows = [
            [plane.index, plane.z, plane.active_maps, plane.activations, plane.cuboid_tests, plane.wall_time]
            for plane in self.planes
        ]
        end = self.write_table(sheet, headers, rows, start)
        self.auto_adjust_columns(sheet)
        if self.planes:
            self.add_activation_chart(sheet, start, end)

        if self.pairs:
            detail = self.create_sheet('Map-Plane Pairs')
            headers = ['Plane', 'Map', 'n', 'Time (s)', 'Boxes in intersection', 'Total boxes', 'Intersect/Total (%)']
            rows = [
                [pair.plane, pair.map_id, pair.n, pair.time_s, pair.boxes_in_intersection,
                 pair.total_boxes, round(100.0 * pair.ratio, 4)]
                for pair in self.pairs
            ]
            self.write_table(detail, headers, rows, 1)
            self.auto_adjust_columns(detail)
        return self

    def add_activation_chart(self, sheet, header_row, end_row):
        chart_sheet = self.create_sheet('Activation Chart')
        chart = BarChart()
        chart.type = 'col'
        chart.style = 10
        chart.title = 'Activations per Plane'
        chart.y_axis.title = 'Activations'
        chart.x_axis.title = 'Plane'

        data = Reference(sheet, min_col=4, min_row=header_row, max_row=end_row)
        categories = Reference(sheet, min_col=1, min_row=header_row + 1, max_row=end_row)
        chart.add_data(data, titles_from_data=True)
        chart.set_categories(categories)
        chart.width = 20
        chart.height = 12
        chart_sheet.add_chart(chart, 'A2')
